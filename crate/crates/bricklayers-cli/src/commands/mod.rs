pub mod compare;
pub mod hydro;
pub mod simulate;
pub mod verify;
pub mod walkers;
