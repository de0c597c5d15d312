"""Init tests."""
