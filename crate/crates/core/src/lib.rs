//! Control and simulation of VTOL vehicles whose thrust direction can be
//! tilted relative to the body.

pub mod allocation;
pub mod controller;
pub mod geom;
pub mod plant;
pub mod reference;
pub mod sim;
