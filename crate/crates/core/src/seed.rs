//! Deterministic seed derivation.
//!
//! Seeds are derived with the SplitMix64 output function: the state is
//! advanced by the golden-ratio increment and passed through the 64-bit
//! avalanche finalizer. Labels are folded in one at a time after hashing them
//! with FNV-1a (strings and integers carry distinct type tags so `"1"` and `1`
//! do not alias).
//!
//! With no labels, `derive_seed(s, &[])` is the first SplitMix64 output for
//! state `s`; in particular `derive_seed(0, &[]) == 0xE220_A839_7B1D_CDAF`.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const FNV_OFFSET: u64 = 0xCBF2_9CE4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01B3;

/// A component of a seed path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label<'a> {
    Str(&'a str),
    Int(u64),
}

impl<'a> From<&'a str> for Label<'a> {
    fn from(s: &'a str) -> Self {
        Label::Str(s)
    }
}

impl<'a> From<&'a String> for Label<'a> {
    fn from(s: &'a String) -> Self {
        Label::Str(s.as_str())
    }
}

impl From<u64> for Label<'_> {
    fn from(v: u64) -> Self {
        Label::Int(v)
    }
}

impl From<usize> for Label<'_> {
    fn from(v: usize) -> Self {
        Label::Int(v as u64)
    }
}

impl From<u32> for Label<'_> {
    fn from(v: u32) -> Self {
        Label::Int(u64::from(v))
    }
}

/// SplitMix64 step: advance `state` and return the mixed output.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: impl IntoIterator<Item = u8>) -> u64 {
    bytes.into_iter().fold(FNV_OFFSET, |h, b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

fn hash_label(label: &Label<'_>) -> u64 {
    match label {
        Label::Str(s) => fnv1a(b"s:".iter().copied().chain(s.bytes())),
        Label::Int(v) => fnv1a(b"i:".iter().copied().chain(v.to_le_bytes())),
    }
}

/// Derives a child seed from `master` and an ordered label path.
pub fn derive_seed(master: u64, labels: &[Label<'_>]) -> u64 {
    labels
        .iter()
        .fold(splitmix64(master), |acc, label| splitmix64(acc ^ hash_label(label)))
}
