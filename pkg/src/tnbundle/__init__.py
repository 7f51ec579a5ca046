"""Neutral-metric geometry engine on tangent bundles.

Builds the split-signature metric G on TN over a chart-described Riemannian
base, with curvature, geodesics, submanifold geometry, Lagrangian-graph and
source-field analysis, and the oriented-line-space embedding into T R^3.
"""

__version__ = "0.1.0"
