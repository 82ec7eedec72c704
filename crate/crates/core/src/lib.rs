//! Construction and numerical verification of ruled austere submanifolds of
//! Euclidean space.

pub mod austere;
pub mod classify;
pub mod families;
pub mod geometry;
pub mod numerics;
pub mod slag;
