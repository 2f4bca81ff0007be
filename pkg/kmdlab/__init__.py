"""
kmdlab - companion-matrix DMD diagnostics package
"""

__version__ = "1.0.0"
