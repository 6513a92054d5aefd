"""JSON-Schema documents for the three on-disk artifacts (loaded as package data)."""
