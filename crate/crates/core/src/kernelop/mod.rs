//! The integral kernel H(x,y) = |f(x−y)| of a diffusion operator, its exact
//! weight matrix on the reduction tree, the vertex Laplacian, Kozyrev
//! wavelets, and the operator spectrum.

mod assemble;
mod spec;
mod spectrum;
mod wavelet;

pub use assemble::{degree_at as degree_at_pub, end_tail, Assembled, OperatorMatrix};
pub use spec::{KernelError, KernelSpec};
pub use spectrum::{
    hs_diagnostic, orthogonality_suite, spectrum, HsDiagnostic, HsVerdict, OrthogonalityReport,
    SpectrumReport,
};
pub use wavelet::{wavelet_eigencheck, wavelet_omega_integral, WaveletSpec};
