//! Reconstruction pipelines driven by a synthetic albedo oracle.

mod oracle;
mod scatterfree;
mod scattering;

pub use oracle::{AlbedoOracle, OracleSettings};
pub use scatterfree::{
    recover_mu_line, recover_sigma_a_scatterfree, recover_sigma_b_scatterfree, LineReport,
    ScatterfreeOutput,
};
pub use scattering::{
    recover_effective_attenuation, recover_k_point, recover_sigma_b_scattering,
    recover_xray_sigma_a_scattering, refine_schedule, KPointOutput, LimitSchedule,
    ProbeDiagnostics, SigmaBScatteringOutput,
};
