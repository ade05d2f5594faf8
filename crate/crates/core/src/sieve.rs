//! Odd-only prime bitmap with a rank table, built by a segmented sieve.

const SEGMENT_ODDS: usize = 1 << 18;

pub struct PrimeBitmap {
    limit: u64,
    bits: Vec<u64>,
    rank: Vec<u32>,
}

fn simple_primes(n: usize) -> Vec<u32> {
    let mut comp = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !comp[i] {
            out.push(i as u32);
            let mut j = i * i;
            while j <= n {
                comp[j] = true;
                j += i;
            }
        }
    }
    out
}

impl PrimeBitmap {
    /// Bytes needed for a bitmap up to `limit`.
    pub fn footprint(limit: u64) -> u64 {
        let words = limit / 128 + 1;
        words * 12
    }

    pub fn new(limit: u64) -> Self {
        Self::with_segment(limit, SEGMENT_ODDS)
    }

    pub fn with_segment(limit: u64, segment_odds: usize) -> Self {
        let segment_odds = segment_odds.max(64) / 64 * 64;
        // bit i stands for 2i+1
        let nbits = (limit / 2 + 1) as usize;
        let nwords = nbits.div_ceil(64);
        let mut bits = vec![0u64; nwords];
        let base = simple_primes(crate::monoid::iroot(limit, 2) as usize + 1);
        let mut seg = vec![true; segment_odds];
        let mut lo = 0usize;
        while lo < nbits {
            let hi = (lo + segment_odds).min(nbits);
            let seg = &mut seg[..hi - lo];
            seg.fill(true);
            for &p in base.iter().skip(1) {
                let p = p as usize;
                let sq = p * p / 2;
                if sq >= hi {
                    break;
                }
                // odd multiples of p sit p apart in bit space
                let mut j = if sq >= lo {
                    sq
                } else {
                    let r = (lo - sq) % p;
                    if r == 0 { lo } else { lo + p - r }
                };
                while j < hi {
                    seg[j - lo] = false;
                    j += p;
                }
            }
            for (k, &b) in seg.iter().enumerate() {
                if b {
                    let i = lo + k;
                    bits[i / 64] |= 1 << (i % 64);
                }
            }
            lo = hi;
        }
        // 1 is not prime; 2 is handled outside the bitmap
        if !bits.is_empty() {
            bits[0] &= !1;
        }
        let last = nbits % 64;
        if last != 0 {
            bits[nwords - 1] &= (1u64 << last) - 1;
        }
        // drop the bit for limit+1 when limit is even
        if limit % 2 == 0 && limit >= 2 {
            let i = (limit / 2) as usize;
            bits[i / 64] &= !(1 << (i % 64));
        }
        let mut rank = Vec::with_capacity(nwords);
        let mut acc = 0u32;
        for w in &bits {
            rank.push(acc);
            acc += w.count_ones();
        }
        PrimeBitmap { limit, bits, rank }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn is_prime(&self, n: u64) -> bool {
        assert!(n <= self.limit, "{n} beyond sieve limit {}", self.limit);
        if n < 3 {
            return n == 2;
        }
        if n % 2 == 0 {
            return false;
        }
        let i = (n / 2) as usize;
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    /// Number of primes <= n.
    pub fn pi(&self, n: u64) -> u64 {
        let n = n.min(self.limit);
        if n < 2 {
            return 0;
        }
        let i = ((n - 1) / 2) as usize; // last odd <= n has bit index i
        let w = i / 64;
        let mask = if i % 64 == 63 { u64::MAX } else { (1u64 << (i % 64 + 1)) - 1 };
        1 + self.rank[w] as u64 + (self.bits[w] & mask).count_ones() as u64
    }

    /// Calls `f(p)` for each prime p in [lo, hi], increasing.
    pub fn for_each_prime(&self, lo: u64, hi: u64, mut f: impl FnMut(u64)) {
        let hi = hi.min(self.limit);
        if lo <= 2 && hi >= 2 {
            f(2);
        }
        let lo = lo.max(3);
        if lo > hi {
            return;
        }
        let first = (lo / 2) as usize;
        let last = ((hi - 1) / 2) as usize;
        let (mut w, end) = (first / 64, last / 64);
        while w <= end {
            let mut word = self.bits[w];
            if w == first / 64 {
                word &= u64::MAX << (first % 64);
            }
            if w == end && last % 64 != 63 {
                word &= (1u64 << (last % 64 + 1)) - 1;
            }
            while word != 0 {
                let b = word.trailing_zeros() as usize;
                f((2 * (w * 64 + b) + 1) as u64);
                word &= word - 1;
            }
            w += 1;
        }
    }

    pub fn primes_upto(&self, n: u64) -> Vec<u64> {
        let mut v = Vec::with_capacity(self.pi(n) as usize);
        self.for_each_prime(2, n, |p| v.push(p));
        v
    }
}
