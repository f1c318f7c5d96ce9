pub mod impedance;
pub mod oect;
pub mod opbt;
pub mod reservoir;
pub mod synapse;
pub mod tft;
