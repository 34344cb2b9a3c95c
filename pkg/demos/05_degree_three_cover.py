#!/usr/bin/env python3
# The worked example end to end: the degree three, genus two cover of the
# rubber line, totally ramified over both ends.
#
# The combinatorial type is the theta graph with a marking on each vertex,
# all three internal edges of slope one.  Continuity forces the three edge
# lengths to agree, so the moduli cone is a ray sitting diagonally inside
# the three dimensional cone of the moduli of curves.  That ray is not a
# union of cones until the cone is subdivided stellarly at the diagonal,
# after which the whole pulled back family satisfies the polyhedral
# flatness and reducedness criteria.

from tropgeom import figure1_demo

report = figure1_demo()
print(report.to_text())
