"""
Homogenization lab for forced graphical mean curvature flow
Numerical experiments on the homogenization rate in laminated periodic media
"""

__version__ = "0.1.0"
