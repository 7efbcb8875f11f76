//! Quantum and classical mechanics of the TTW superintegrable potential
//! H = p_r² + p_θ²/r² + ω²r² + k²(α/sin²kθ + β/cos²kθ)/r².

pub mod classical;
pub mod coherent;
pub mod conventions;
pub mod ode;
pub mod oracle;
pub mod params;
pub mod quadrature;
pub mod specfun;
pub mod spectrum;
