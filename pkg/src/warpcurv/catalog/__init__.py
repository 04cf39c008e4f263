"""Built-in manifest fixtures: classic warped products ready to load."""
