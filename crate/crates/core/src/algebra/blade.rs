//! Basis monomials of the graded algebra on one chart.
//!
//! A blade is `dz_I dzb_J e_K es_L` with every index set ascending and the
//! four groups in that order. All generators are odd, so the algebra is an
//! exterior algebra on `4n` generators and the product sign is the parity
//! of the shuffle that sorts the concatenated generator list.

use std::fmt;

/// Maximum supported dimension (one 16-bit lane per generator family).
pub const MAX_DIM: usize = 16;

const LANE: u32 = 16;
const MASK: u64 = 0xffff;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Blade(u64);

/// Generator families in canonical order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Dz = 0,
    Dzb = 1,
    E = 2,
    Es = 3,
}

impl Blade {
    pub const ONE: Blade = Blade(0);

    pub fn new(dz: u16, dzb: u16, e: u16, es: u16) -> Self {
        Blade(dz as u64 | (dzb as u64) << LANE | (e as u64) << (2 * LANE) | (es as u64) << (3 * LANE))
    }

    /// Single generator of the given family, 0-based index.
    pub fn generator(family: Family, index: usize) -> Self {
        assert!(index < MAX_DIM, "generator index {index} exceeds {MAX_DIM}");
        Blade(1u64 << (family as u32 * LANE + index as u32))
    }

    /// Blade from explicit index lists (0-based). Each list must be strictly increasing.
    pub fn from_indices(dz: &[usize], dzb: &[usize], e: &[usize], es: &[usize]) -> Self {
        let m = |v: &[usize]| {
            debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
            v.iter().fold(0u16, |acc, &i| acc | 1 << i)
        };
        Blade::new(m(dz), m(dzb), m(e), m(es))
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn lane(self, f: Family) -> u16 {
        ((self.0 >> (f as u32 * LANE)) & MASK) as u16
    }

    pub fn dz(self) -> u16 {
        self.lane(Family::Dz)
    }

    pub fn dzb(self) -> u16 {
        self.lane(Family::Dzb)
    }

    pub fn e(self) -> u16 {
        self.lane(Family::E)
    }

    pub fn es(self) -> u16 {
        self.lane(Family::Es)
    }

    /// Holomorphic and antiholomorphic form degrees.
    pub fn bidegree(self) -> (u32, u32) {
        (self.dz().count_ones(), self.dzb().count_ones())
    }

    pub fn form_degree(self) -> u32 {
        self.dz().count_ones() + self.dzb().count_ones()
    }

    /// Exterior degrees in V and V*.
    pub fn bundle_degree(self) -> (u32, u32) {
        (self.e().count_ones(), self.es().count_ones())
    }

    /// The grading `|I| + |J| + |K| - |L|`.
    pub fn degree(self) -> i32 {
        (self.form_degree() + self.e().count_ones()) as i32 - self.es().count_ones() as i32
    }

    /// Parity of the grading, equal to the number of generators mod 2.
    pub fn parity(self) -> u32 {
        self.0.count_ones() & 1
    }

    pub fn with_lane(self, f: Family, v: u16) -> Self {
        let shift = f as u32 * LANE;
        Blade((self.0 & !(MASK << shift)) | (v as u64) << shift)
    }

    /// Product of two blades: `None` on a repeated generator, otherwise the
    /// sign and the merged blade.
    #[inline]
    pub fn mul(self, other: Blade) -> Option<(i8, Blade)> {
        if self.0 & other.0 != 0 {
            return None;
        }
        // count pairs (x in self, y in other) with x above y
        let mut swaps = 0u32;
        let mut b = other.0;
        while b != 0 {
            let y = b.trailing_zeros();
            let above = if y == 63 { 0 } else { self.0 >> (y + 1) };
            swaps += above.count_ones();
            b &= b - 1;
        }
        let sign = if swaps & 1 == 0 { 1 } else { -1 };
        Some((sign, Blade(self.0 | other.0)))
    }

    /// The dual pairing of the bundle parts: nonzero only when the `e` and
    /// `es` index sets coincide, in which case `e_K es_K` pairs to one and
    /// the form part survives.
    pub fn kappa(self) -> Option<Blade> {
        if self.e() == self.es() {
            Some(Blade::new(self.dz(), self.dzb(), 0, 0))
        } else {
            None
        }
    }

    pub fn max_index(self) -> Option<usize> {
        let all = self.dz() | self.dzb() | self.e() | self.es();
        if all == 0 {
            None
        } else {
            Some(15 - all.leading_zeros() as usize)
        }
    }
}

fn write_lane(f: &mut fmt::Formatter<'_>, name: &str, v: u16, first: &mut bool) -> fmt::Result {
    for i in 0..16 {
        if v >> i & 1 == 1 {
            if !*first {
                write!(f, "^")?;
            }
            write!(f, "{name}{}", i + 1)?;
            *first = false;
        }
    }
    Ok(())
}

impl fmt::Display for Blade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == 0 {
            return write!(f, "1");
        }
        let mut first = true;
        write_lane(f, "dz", self.dz(), &mut first)?;
        write_lane(f, "dzb", self.dzb(), &mut first)?;
        write_lane(f, "e", self.e(), &mut first)?;
        write_lane(f, "es", self.es(), &mut first)
    }
}

impl fmt::Debug for Blade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Iterates over all subsets of the bits of `mask`, including zero.
#[allow(dead_code)]
pub(crate) fn subsets(mask: u16) -> impl Iterator<Item = u16> {
    let mut next = Some(mask);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 { None } else { Some((cur - 1) & mask) };
        Some(cur)
    })
}
