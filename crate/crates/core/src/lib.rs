//! A hydra game whose termination is witnessed by ordinal diagrams.
//!
//! The crate covers the ordinal diagram system used as a termination
//! measure ([`diagram`]), hydra and label terms ([`hydra`]), their ordinal
//! assignment ([`assign`]), the move relation ([`moves`]), game trees and
//! plays ([`game`]), executable decrease checks ([`verify`]), the text and
//! JSON formats ([`textio`]), the command line ([`cli`]) and the HTTP session
//! API ([`server`]).

pub mod diagram;
pub mod assign;
pub mod generate;
pub mod hydra;
pub mod textio;
pub mod moves;
pub mod verify;
pub mod game;
pub mod server;
pub mod cli;
