//! Classical and virtual Grothendieck residues of a holomorphic section of
//! a rank-n bundle over an n-dimensional complex manifold.

pub mod algebra;
pub mod checks;
pub mod cycles;
pub mod expr;
pub mod koszul;
pub mod mq;
pub mod oracles;
pub mod report;
pub mod scene;

pub use num_complex::Complex64;
