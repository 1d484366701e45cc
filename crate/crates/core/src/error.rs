// Copyright 2026 The cacc-reach Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("closed loop is not Hurwitz (max real part {max_real:.3e})")]
    UnstableModel { max_real: f64 },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("model must be {expected}-time for this operation")]
    WrongTimeDomain { expected: &'static str },

    #[error("ellipsoid block is numerically singular")]
    SingularBlock,

    #[error("map is rank deficient")]
    RankDeficient,

    #[error("invalid ellipsoid: {0}")]
    InvalidEllipsoid(String),

    #[error("no bound supplied for attacked channel {0}")]
    MissingBound(u8),

    #[error("contraction rate a = {0} outside (0, 1)")]
    InvalidRate(f64),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("no contraction rate admits a solution")]
    AllInfeasible,

    #[error("signal on channel {channel} exceeds its bound ({amplitude} > {bound})")]
    InadmissibleSignal {
        channel: String,
        amplitude: f64,
        bound: f64,
    },

    #[error("missing signal for channel {0}")]
    MissingSignal(String),

    #[error("config parse error: {0}")]
    Parse(String),

    #[error("config schema error at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("{0}")]
    Precondition(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
