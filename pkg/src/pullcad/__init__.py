"""pullcad: a parametric CAD kernel whose parameters are edited by pulling on faces.

A model is regenerated into tagged triangle meshes; a discrete sweep of one
parameter produces candidate shapes; the candidate nearest to a tracked hand
point is shown and can be committed back through the constraint graph.
"""

__version__ = "0.1.0"
