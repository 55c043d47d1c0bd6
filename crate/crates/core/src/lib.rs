//! Khovanov homology and its refinements for links in thickened punctured disks.

pub mod cli;
pub mod diagram;
pub mod exactalg;
pub mod homology;
pub mod khovanov;
pub mod spectral;
