"""Performance analysis of RIS-assisted links with phase noise and mobility."""
__version__ = "0.1.0"
