mod centerness;
mod eval;
mod ifga;
mod tracking;

pub use centerness::centerness_map;
pub use eval::eval;
pub use ifga::{ifga_demo, Features, IfgaDemo, Weights};
pub use tracking::{simulate, track};
