use serde::Serialize;

/// Answer to a question whose affirmative side quantifies over an unbounded
/// family (all catalysts, all copy numbers). `Unknown` means the budget ran
/// out; it is never a negative answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "evidence", rename_all = "lowercase")]
pub enum Tri<Y, N> {
    Yes(Y),
    No(N),
    Unknown,
}

impl<Y, N> Tri<Y, N> {
    pub fn is_yes(&self) -> bool {
        matches!(self, Tri::Yes(_))
    }

    pub fn is_no(&self) -> bool {
        matches!(self, Tri::No(_))
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Tri::Unknown)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Tri::Yes(_) => "yes",
            Tri::No(_) => "no",
            Tri::Unknown => "unknown",
        }
    }

    pub fn yes(&self) -> Option<&Y> {
        match self {
            Tri::Yes(y) => Some(y),
            _ => None,
        }
    }

    pub fn no(&self) -> Option<&N> {
        match self {
            Tri::No(n) => Some(n),
            _ => None,
        }
    }
}
