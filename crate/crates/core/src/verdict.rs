use std::fmt;

/// Outcome of a bounded check. `Inconclusive` means the search budget ran
/// out without a certificate either way; it is never a pass or a fail.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict<C> {
    Pass,
    Fail(C),
    Inconclusive(String),
}

impl<C> Verdict<C> {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    pub fn is_fail(&self) -> bool {
        matches!(self, Verdict::Fail(_))
    }

    pub fn is_inconclusive(&self) -> bool {
        matches!(self, Verdict::Inconclusive(_))
    }

    pub fn kind(&self) -> VerdictKind {
        match self {
            Verdict::Pass => VerdictKind::Pass,
            Verdict::Fail(_) => VerdictKind::Fail,
            Verdict::Inconclusive(_) => VerdictKind::Inconclusive,
        }
    }

    pub fn failure(&self) -> Option<&C> {
        match self {
            Verdict::Fail(c) => Some(c),
            _ => None,
        }
    }

    pub fn map_fail<D>(self, f: impl FnOnce(C) -> D) -> Verdict<D> {
        match self {
            Verdict::Pass => Verdict::Pass,
            Verdict::Fail(c) => Verdict::Fail(f(c)),
            Verdict::Inconclusive(r) => Verdict::Inconclusive(r),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VerdictKind {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerdictKind::Pass => "pass",
            VerdictKind::Fail => "fail",
            VerdictKind::Inconclusive => "inconclusive",
        })
    }
}

impl std::str::FromStr for VerdictKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "pass" => Ok(VerdictKind::Pass),
            "fail" => Ok(VerdictKind::Fail),
            "inconclusive" => Ok(VerdictKind::Inconclusive),
            other => Err(format!("unknown verdict {other:?}")),
        }
    }
}
