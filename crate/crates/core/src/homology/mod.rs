//! Controlled coarse chains, the boundary map, and Ponzi certificates
//! built from maximum flows.
//!
//! Sign convention: a certificate t satisfies ∂t = +1 at every vertex of
//! its region F, with ∂[u, v] = [v] - [u]. A unit of flow moving from u to
//! v is recorded as the coefficient +1 on [v, u].

mod chain;
mod extend;
mod ponzi;

pub use chain::{boundary1, control_norm, propagation, Chain0, Chain1};
pub use extend::{extend_tails, ExtensionReport};
pub use ponzi::{
    fundamental_chain, min_control_constant, ponzi_feasible, ponzi_sweep, verify_certificate, write_sweep_csv,
    CertificateFailure, CertificateReport, KSearch, KStar, PonziCertificate, PonziOutcome, Region, SweepRow, Tail,
    CERT_TOL,
};
