"""Non-Hermitian lattice probes: models, spectral topology, Fisher scaling."""

__version__ = "0.1.0"

from .models import (BC, Family, Kind, ModelSpec, OperatorMatrix,
                     build_aah, build_hatano_nelson, build_nh_ssh,
                     build_operator, build_quantum_walk, build_qwz_bloch,
                     build_qwz_real_space, build_ssh_chiral_inv, build_ssh_pt,
                     bloch_matrix, lambda_of, with_lambda)
from .spectral import (Spectrum, SpectralCurve, SteadyState, WindingResult,
                       cumulative_population, eig, is_arc, localization_fit,
                       loop_area, pbc_curve_1d, qwz_slice_curves,
                       site_amplitudes, steady_state, winding_1d, winding_2d,
                       winding_aah)
from .gbz import (CriticalPoint, GbzSolution, hn_obc_energies, hn_obc_state,
                  hn_obc_state_dlambda, point_gap_closing, qw_beta_modulus,
                  qwz_beta_quartic, ssh_beta_roots, ssh_mode_state,
                  ssh_transcendental_solve)
from .metrology import (FisherRecord, ScalingFit, cfi_position,
                        edge_state_qfi, exponent_sweep, fisher_record,
                        qfi_hn_analytic, qfi_pure, scaling_fit,
                        state_derivative)
