"""Motion control for a 24-DOF direct-drive ambidextrous fingerspelling hand."""

__version__ = "0.1.0"
