//! Blinded ranking service for comparing derendering methods.
//!
//! Raters open a session over a corpus of per-method renderings, rank the
//! anonymized candidates for each sample, and every ranking is decomposed
//! into pairwise Elo updates. All state is derived from an append-only event
//! log (format documented in [`events`]).
//!
//! Routes: `POST /sessions`, `GET /sessions/{id}/next`,
//! `POST /sessions/{id}/rankings`, `GET /leaderboard`, `GET /healthz`, and
//! `GET /images/{id}/{index}/{label}` for blinded candidate images.

mod arena;
pub mod events;
mod http;

pub use arena::{
    label, replay_standings, Arena, ArenaError, Candidate, ComparisonPage, CreateSession, Leaderboard,
    MethodStanding, NextView, Progress, Reveal, SessionCreated, SubmitAck, SubmitRanking, ORIGINAL_FILE,
};
pub use http::{router, serve, serve_blocking, ServeOptions, Service};
