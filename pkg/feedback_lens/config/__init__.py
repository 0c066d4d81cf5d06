"""Configuration pieces needed for the feedback circuit analysis."""
