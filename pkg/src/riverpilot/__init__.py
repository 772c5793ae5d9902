"""River-navigation learning game: localization, gameplay, assessment, analytics."""

__version__ = "0.1.0"
