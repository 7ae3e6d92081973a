//! Wire values.
//!
//! A message is a fixed-length bit string (length set per run, at most 63
//! bits) or the failure symbol `⊥`. The erasure symbol `★` exists only in
//! reference transcripts, as [`Sym::Star`].

use core::fmt;

/// A payload or `⊥`. Payloads are stored in the low bits of a `u64`;
/// `u64::MAX` is reserved for `⊥`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Msg(u64);

/// Longest payload the representation supports.
pub const MAX_LEN: u32 = 63;

impl Msg {
    pub const BOT: Msg = Msg(u64::MAX);

    /// Payload `x`. Panics if `x` does not fit in [`MAX_LEN`] bits.
    pub const fn val(x: u64) -> Msg {
        assert!(x >> MAX_LEN == 0, "payload wider than 63 bits");
        Msg(x)
    }

    pub const fn is_bot(self) -> bool {
        self.0 == u64::MAX
    }

    pub const fn value(self) -> Option<u64> {
        if self.is_bot() {
            None
        } else {
            Some(self.0)
        }
    }

    /// True if this is `⊥` or a payload of at most `len` bits.
    pub const fn fits(self, len: u32) -> bool {
        self.is_bot() || len >= 64 || self.0 >> len == 0
    }

    /// Raw representation, `u64::MAX` for `⊥`.
    pub const fn raw(self) -> u64 {
        self.0
    }

    pub const fn from_raw(x: u64) -> Msg {
        Msg(x)
    }

    /// Wrap for transport one level down: `⊥` becomes the payload `0`, a
    /// payload `x` becomes `2x+1`. The result is one bit longer.
    pub const fn envelope(self) -> Msg {
        match self.value() {
            None => Msg(0),
            Some(x) => Msg((x << 1) | 1),
        }
    }

    /// Inverse of [`Msg::envelope`]. Anything that is not a well formed
    /// envelope decodes to `⊥`.
    pub const fn unwrap_envelope(self) -> Msg {
        match self.value() {
            None => Msg::BOT,
            Some(v) if v & 1 == 1 => Msg(v >> 1),
            Some(_) => Msg::BOT,
        }
    }
}

impl fmt::Debug for Msg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Msg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value() {
            None => f.write_str("-"),
            Some(x) => write!(f, "{x}"),
        }
    }
}

/// A value in a reference transcript: known, or erased.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Sym {
    Known(Msg),
    Star,
}

impl Sym {
    pub fn known(self) -> Option<Msg> {
        match self {
            Sym::Known(m) => Some(m),
            Sym::Star => None,
        }
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sym::Known(m) => fmt::Display::fmt(m, f),
            Sym::Star => f.write_str("*"),
        }
    }
}

/// Strict majority: the value held by more than half of the entries, or `⊥`
/// when no value has one. `⊥` entries are ordinary votes, so a majority of
/// failures is a failure. Panics on an empty list.
pub fn majority(values: &[Msg]) -> Msg {
    assert!(!values.is_empty(), "majority of an empty list");
    majority_by(values.len(), |i| values[i])
}

/// [`majority`] over `n` entries produced by `at`.
pub fn majority_by(n: usize, at: impl Fn(usize) -> Msg) -> Msg {
    let mut cand = Msg::BOT;
    let mut count = 0usize;
    for i in 0..n {
        let m = at(i);
        if count == 0 {
            cand = m;
            count = 1;
        } else if m == cand {
            count += 1;
        } else {
            count -= 1;
        }
    }
    if count == 0 {
        return Msg::BOT;
    }
    let hits = (0..n).filter(|&i| at(i) == cand).count();
    if 2 * hits > n {
        cand
    } else {
        Msg::BOT
    }
}
