pub mod check;
pub mod envelope;
pub mod modal;
pub mod scan;
pub mod verify;
