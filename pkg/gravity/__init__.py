"""
Adaptive-Gravity: Training mit Anti-Gravity-Centroid-Relocation und
Robustheits-Evaluation gegen gradientenbasierte Angriffe.
"""

__version__ = '1.0.0'
