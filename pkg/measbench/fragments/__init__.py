"""Hartree-Fock-solvable fermionic fragments: low-rank factorization and F3."""

from measbench.fragments.f3 import (
    F3Result,
    FluidVarianceModel,
    FragmentPlan,
    build_fragment_plan,
    f3_collect,
    f3_optimize,
    fragment_expectation,
    fragment_variance,
)
from measbench.fragments.low_rank import (
    FermionicFragment,
    lr_decompose,
    one_body_fragment,
    orbital_generator,
    reconstruct_two_body,
    spin_orbital_generator,
)
