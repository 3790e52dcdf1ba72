pub mod builtins;
pub mod cli;
pub mod compiler;
pub mod crn;
pub mod funcspec;
pub mod rational;
pub mod simulator;
pub mod verifier;
