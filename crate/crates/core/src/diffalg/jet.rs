use std::fmt;

/// Which of the two commuting derivations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    D1,
    D2,
}

impl Axis {
    pub fn other(self) -> Axis {
        match self {
            Axis::D1 => Axis::D2,
            Axis::D2 => Axis::D1,
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Axis::D1 => 1,
            Axis::D2 => 2,
        }
    }

    pub fn from_index(i: u8) -> Option<Axis> {
        match i {
            1 => Some(Axis::D1),
            2 => Some(Axis::D2),
            _ => None,
        }
    }
}

/// A generator of the algebra: the potential `u` or one of the Lax coefficients `v_m`, `w_l`.
///
/// Variant order gives the canonical kind order `u < v < w`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gen {
    U,
    V(u32),
    W(u32),
}

impl Gen {
    pub fn tau(self) -> Gen {
        match self {
            Gen::U => Gen::U,
            Gen::V(m) => Gen::W(m),
            Gen::W(l) => Gen::V(l),
        }
    }

    /// Short name used in JSON maps and on the command line (`u`, `v0`, `w3`).
    pub fn name(self) -> String {
        match self {
            Gen::U => "u".to_string(),
            Gen::V(m) => format!("v{m}"),
            Gen::W(l) => format!("w{l}"),
        }
    }

    pub fn parse(s: &str) -> Option<Gen> {
        let s = s.trim();
        if s == "u" {
            return Some(Gen::U);
        }
        let (kind, idx) = s.split_at(1.min(s.len()));
        let idx = idx.trim_start_matches('_').parse::<u32>().ok()?;
        match kind {
            "v" => Some(Gen::V(idx)),
            "w" => Some(Gen::W(idx)),
            _ => None,
        }
    }
}

impl fmt::Display for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// A canonical jet `∂1^d1 ∂2^d2 (g)`.
///
/// Only canonical jets are representable: `v_m` jets carry no `∂2`, `w_l` jets no `∂1`.
/// Field order makes the derived `Ord` lexicographic on (kind, index, d1, d2).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Jet {
    gen: Gen,
    d1: u32,
    d2: u32,
}

impl Jet {
    pub fn u(d1: u32, d2: u32) -> Jet {
        Jet { gen: Gen::U, d1, d2 }
    }

    pub fn v(m: u32, d1: u32) -> Jet {
        Jet { gen: Gen::V(m), d1, d2: 0 }
    }

    pub fn w(l: u32, d2: u32) -> Jet {
        Jet { gen: Gen::W(l), d1: 0, d2 }
    }

    pub fn of(gen: Gen) -> Jet {
        Jet { gen, d1: 0, d2: 0 }
    }

    /// Builds a jet, rejecting the non-canonical ones.
    pub fn new(gen: Gen, d1: u32, d2: u32) -> Option<Jet> {
        match gen {
            Gen::V(_) if d2 != 0 => None,
            Gen::W(_) if d1 != 0 => None,
            _ => Some(Jet { gen, d1, d2 }),
        }
    }

    pub fn gen(&self) -> Gen {
        self.gen
    }

    pub fn d1(&self) -> u32 {
        self.d1
    }

    pub fn d2(&self) -> u32 {
        self.d2
    }

    pub fn order(&self, axis: Axis) -> u32 {
        match axis {
            Axis::D1 => self.d1,
            Axis::D2 => self.d2,
        }
    }

    /// The jet one step further along `axis`, when that jet is canonical.
    pub fn bump(&self, axis: Axis) -> Option<Jet> {
        match (self.gen, axis) {
            (Gen::V(_), Axis::D2) | (Gen::W(_), Axis::D1) => None,
            (_, Axis::D1) => Some(Jet { d1: self.d1 + 1, ..*self }),
            (_, Axis::D2) => Some(Jet { d2: self.d2 + 1, ..*self }),
        }
    }

    pub fn tau(&self) -> Jet {
        Jet { gen: self.gen.tau(), d1: self.d2, d2: self.d1 }
    }

    pub fn latex(&self) -> String {
        let mut s = String::new();
        for (axis, n) in [(1, self.d1), (2, self.d2)] {
            match n {
                0 => {}
                1 => s.push_str(&format!("\\partial_{axis}")),
                _ => s.push_str(&format!("\\partial_{axis}^{{{n}}}")),
            }
        }
        let g = match self.gen {
            Gen::U => "u".to_string(),
            Gen::V(m) => format!("v_{{{m}}}"),
            Gen::W(l) => format!("w_{{{l}}}"),
        };
        if s.is_empty() {
            g
        } else {
            format!("{s}({g})")
        }
    }
}

impl fmt::Display for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut prefix = String::new();
        for (axis, n) in [(1, self.d1), (2, self.d2)] {
            match n {
                0 => {}
                1 => prefix.push_str(&format!("d{axis}")),
                _ => prefix.push_str(&format!("d{axis}^{n}")),
            }
        }
        if prefix.is_empty() {
            write!(f, "{}", self.gen)
        } else {
            write!(f, "{prefix}({})", self.gen)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order() {
        assert!(Jet::u(5, 5) < Jet::v(0, 0));
        assert!(Jet::v(0, 9) < Jet::v(1, 0));
        assert!(Jet::v(7, 0) < Jet::w(0, 0));
        assert!(Jet::u(1, 0) < Jet::u(1, 1));
    }

    #[test]
    fn non_canonical_rejected() {
        assert!(Jet::new(Gen::V(0), 0, 1).is_none());
        assert!(Jet::new(Gen::W(0), 1, 0).is_none());
        assert_eq!(Jet::v(0, 0).bump(Axis::D2), None);
        assert_eq!(Jet::u(0, 0).bump(Axis::D2), Some(Jet::u(0, 1)));
    }

    #[test]
    fn rendering() {
        assert_eq!(Jet::u(2, 1).to_string(), "d1^2d2(u)");
        assert_eq!(Jet::v(0, 0).to_string(), "v0");
        assert_eq!(Jet::w(1, 3).latex(), "\\partial_2^{3}(w_{1})");
        assert_eq!(Gen::parse("v12"), Some(Gen::V(12)));
        assert_eq!(Gen::parse("w_0"), Some(Gen::W(0)));
        assert_eq!(Gen::parse("x"), None);
    }

    #[test]
    fn tau_transposes_u_jets() {
        assert_eq!(Jet::u(2, 1).tau(), Jet::u(1, 2));
        assert_eq!(Jet::v(3, 2).tau(), Jet::w(3, 2));
        assert_eq!(Jet::w(1, 4).tau().tau(), Jet::w(1, 4));
    }
}
