pub mod error;
pub mod krylov;
pub mod manifold;
pub mod meo;
pub mod model;
pub mod objective;
#[cfg(any(test, feature = "test-oracles"))]
pub mod oracle;
pub mod rar;
pub mod report;
pub mod rtr;
