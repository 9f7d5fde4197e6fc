pub mod align;
pub mod bench;
pub mod coreset;
pub mod dist;
pub mod embed;
