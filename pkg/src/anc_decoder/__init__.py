# __init__.py
# Marks anc_decoder as a package and lists the public modules.
# Package names use underscores (anc_decoder); the project name in pyproject.toml uses dashes (anc-decoder).

__version__ = "0.1.0"
