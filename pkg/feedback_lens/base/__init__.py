"""Base part of the feedback circuit analysis: the circuit object model."""
