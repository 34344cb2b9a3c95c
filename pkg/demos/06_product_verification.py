#!/usr/bin/env python3
# Full verification runs: subdivide the moduli of curves along the forgetful
# images of one or two contact data, pull the map complexes back, and check
# every polyhedral hypothesis, including the comparison of the two factor
# complex with the fiber product of the single factor ones.

from tropgeom import dr_support, product_run, single_factor_run

# one factor: genus one, contacts (2, -2)
report = single_factor_run(1, 2, (2, -2))
print("single factor run passed:", report.all_passed)
print("base cones before/after:", report.subdivision)

# two factors at once; the report also carries the chamber-versus-fiber
# product comparisons behind the degree one statement
report = product_run(1, 2, (2, -2), (1, -1))
print("two factor run passed:", report.all_passed)
for check in report.checks:
    if "fiber product" in check.name or "disjoint" in check.name:
        print(" ", check.name, "@", check.scope, "->", check.passed)

# the ramification support: union of all forgetful images, its subdividing
# refinement, and the codimension table of the support strata
result = dr_support(1, 2, (2, -2))
print("support strata:")
for s in result.strata:
    print(f"  host {s['host']}: support dim {s['support_dim']} "
          f"in host dim {s['host_dim']} (codim {s['codim']})")
