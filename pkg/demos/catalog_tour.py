"""Tour of the builtin problem catalog.

For each entry: the documented parameters, the sampled verdict on the
standing assumptions A1..A8, and (for x-independent fluxes) the detected
affine interval with its drift speed.
"""

import numpy as np

from clhjlab import (
    builtin_catalog,
    catalog_names,
    detect_affine_interval,
    validate_assumptions,
)
from clhjlab.catalog import catalog_param_docs


def main():
    for name in catalog_names():
        spec = builtin_catalog(name)
        print(f"\n=== {name} ===")
        print(f"params: {catalog_param_docs(name)}")
        print(f"domain: {spec.domain.kind}, working range "
              f"[{spec.working_range[0]:.3g}, {spec.working_range[1]:.3g}]")

        report = validate_assumptions(spec)
        tags = " ".join(f"{k}:{v.status}" for k, v in sorted(report.verdicts.items()))
        print(f"assumptions: {tags}")

        if spec.flux.x_independent:
            iv = detect_affine_interval(spec.flux, spec.diffusion,
                                        spec.working_range, tol=1e-6)
            if iv.degenerate:
                print(f"affine interval: degenerate at {{0}}, drift d = {iv.d:.4g}")
            else:
                print(f"affine interval: [{iv.a:.4f}, {iv.b:.4f}], "
                      f"drift d = {iv.d:.4g}")


if __name__ == "__main__":
    main()
