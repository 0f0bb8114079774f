// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Seeding rules.
//!
//! All randomness comes from ChaCha8 streams. A trial seed selects the key;
//! each protocol phase uses its own stream number so phases never share
//! draws. Sweep trials derive their seed from the master seed and the trial
//! index with SplitMix64:
//!
//! ```text
//! trial_seed = splitmix64(master ^ splitmix64(index))
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream numbers of the per-trial phases.
pub mod stream {
    pub const PLACEMENT: u64 = 1;
    pub const VIRTUAL_COORDS: u64 = 2;
    pub const ANTENNA_ELEMENTS: u64 = 3;
    /// Per-node tie-break streams start here (`NODE_TIES + node id`).
    pub const NODE_TIES: u64 = 1 << 32;
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn trial_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
