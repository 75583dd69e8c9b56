"""Event extraction for commodity news: entity mentions, event triggers,
argument roles and event properties (polarity, modality, intensity)."""

__version__ = "0.1.0"
