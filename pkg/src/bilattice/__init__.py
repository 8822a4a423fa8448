"""Quantum emitters in bilayer square-lattice photonic baths.

Band structure and density of states of the hybridized bath, in-gap
bound states of small and giant atoms (quadrature and exact
diagonalization), chiral-symmetric effective spin models with a
generalized 2D SSH phase, and the dissipative star-coupling
entanglement protocol.
"""

__version__ = "1.0.0"

from .lattice import (BandStructure, BilayerLattice, DisorderRealization,
                      band_energies, band_structure, bloch_kernel,
                      build_realspace_hamiltonian, density_of_states,
                      dispersion_f, inner_gap_half_width, polariton_angles,
                      thermal_occupation)
from .bound_state import (BoundStateSolution, CouplingPoint, EmitterConfig,
                          bs_exact_diagonalization, bs_momentum_amplitudes,
                          bs_realspace_profile, parity_norms, self_energy,
                          solve_pole)
from .giant_atom import giant_bs_profile, interference_factor, phase_profile
from .spin_model import (SSHParams, SpinArray, SpinCouplingMatrix, SpinSite,
                         bloch_f_S, build_ssh_array, effective_couplings,
                         finite_spectrum, fit_ssh_params, ssh_bloch,
                         wilson_polarization)
from .dynamics import (EntangleSetup, LindbladResult, build_star_hamiltonian,
                       fidelity_at_optimal_time, lindblad_evolve,
                       protocol_summary)

__all__ = [
    "__version__",
    "BandStructure", "BilayerLattice", "DisorderRealization",
    "band_energies", "band_structure", "bloch_kernel",
    "build_realspace_hamiltonian", "density_of_states", "dispersion_f",
    "inner_gap_half_width", "polariton_angles", "thermal_occupation",
    "BoundStateSolution", "CouplingPoint", "EmitterConfig",
    "bs_exact_diagonalization", "bs_momentum_amplitudes",
    "bs_realspace_profile", "parity_norms", "self_energy", "solve_pole",
    "giant_bs_profile", "interference_factor", "phase_profile",
    "SSHParams", "SpinArray", "SpinCouplingMatrix", "SpinSite",
    "bloch_f_S", "build_ssh_array", "effective_couplings",
    "finite_spectrum", "fit_ssh_params", "ssh_bloch", "wilson_polarization",
    "EntangleSetup", "LindbladResult", "build_star_hamiltonian",
    "fidelity_at_optimal_time", "lindblad_evolve", "protocol_summary",
]
