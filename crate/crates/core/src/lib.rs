// Copyright 2026 The cacc-reach Authors
// SPDX-License-Identifier: Apache-2.0

//! Security metrics for CACC vehicle-following controllers under
//! resource-limited sensor and V2V attacks.
//!
//! The pipeline is: build the continuous closed loop of one follower for a
//! controller realization and a set of attacked sensors
//! ([`platoon`]), discretize it exactly under zero-order hold
//! ([`discretize`]), and compute the minimum-volume invariant ellipsoid
//! containing every state the attacks can induce ([`reach`]). The volume of
//! that ellipsoid, in 4-D or projected onto the velocity/gap plane
//! ([`ellipsoid`]), is the security metric. [`sim`] checks the bounds
//! empirically and [`study`]/[`report`] run the sensitivity sweeps.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod discretize;
pub mod ellipsoid;
pub mod error;
pub mod exec;
pub mod platoon;
pub mod reach;
pub mod report;
pub mod sim;
pub mod study;

pub use error::{Error, Result};
