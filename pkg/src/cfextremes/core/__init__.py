"""Core modules for cfextremes (CF arithmetic, growth, construction, dimension)."""
