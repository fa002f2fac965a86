"""Library modules of the rainbow chain laboratory."""
