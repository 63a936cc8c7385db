//! Hierarchical declaration and module names.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// A dot-separated hierarchical name such as `MyNat.add_comm`.
///
/// Always has at least one segment.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name {
    segments: Vec<String>,
}

impl Name {
    pub fn new<I, S>(segments: I) -> Result<Name, Error>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let segments: Vec<String> = segments.into_iter().map(Into::into).collect();
        if segments.is_empty() {
            return Err(Error::InvalidName(String::new()));
        }
        for seg in &segments {
            if !is_identifier_segment(seg) {
                return Err(Error::InvalidName(segments.join(".")));
            }
        }
        Ok(Name { segments })
    }

    /// Builds a name from a single segment without validation.
    pub(crate) fn atom(segment: &str) -> Name {
        Name {
            segments: vec![segment.to_string()],
        }
    }

    /// The distinguished axiom contributed by `sorry` placeholders.
    pub fn sorry_ax() -> Name {
        Name::atom("sorryAx")
    }

    pub fn is_sorry_ax(&self) -> bool {
        self.segments.len() == 1 && self.segments[0] == "sorryAx"
    }

    pub fn segments(&self) -> &[String] {
        &self.segments
    }

    pub fn first(&self) -> &str {
        &self.segments[0]
    }

    pub fn last(&self) -> &str {
        self.segments.last().expect("nonempty")
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `self ++ other`.
    pub fn join(&self, other: &Name) -> Name {
        let mut segments = self.segments.clone();
        segments.extend(other.segments.iter().cloned());
        Name { segments }
    }

    /// The name without its last segment, if any remains.
    pub fn parent(&self) -> Option<Name> {
        if self.segments.len() <= 1 {
            None
        } else {
            Some(Name {
                segments: self.segments[..self.segments.len() - 1].to_vec(),
            })
        }
    }

    /// The name without its first segment, if any remains.
    pub fn drop_first(&self) -> Option<Name> {
        if self.segments.len() <= 1 {
            None
        } else {
            Some(Name {
                segments: self.segments[1..].to_vec(),
            })
        }
    }

    pub fn starts_with(&self, prefix: &Name) -> bool {
        self.segments.len() >= prefix.segments.len()
            && self.segments[..prefix.segments.len()] == prefix.segments[..]
    }
}

/// Whether `c` may begin an identifier segment.
pub fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic()
        || c == '_'
        || (!c.is_ascii() && c.is_alphabetic() && !matches!(c, 'λ' | 'Π' | 'Σ'))
}

/// Whether `c` may continue an identifier segment.
pub fn is_ident_rest(c: char) -> bool {
    is_ident_start(c)
        || c.is_ascii_digit()
        || matches!(c, '\'' | '!' | '?')
        || ('\u{2080}'..='\u{209C}').contains(&c)
        || (!c.is_ascii() && c.is_alphanumeric())
}

pub fn is_identifier_segment(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if is_ident_start(c) => chars.all(is_ident_rest),
        _ => false,
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.segments.join("."))
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}`", self)
    }
}

impl FromStr for Name {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Name::new(s.split('.'))
    }
}

impl Serialize for Name {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Name {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Byte range of a construct inside a module's source file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceSpan {
    pub module: Name,
    pub byte_start: usize,
    pub byte_end: usize,
    pub line: usize,
}

/// An entry of a `uses`-style list: either a declaration name or a raw LaTeX label.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum NameOrLabel {
    Name(Name),
    Label(String),
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_dotted_names() {
        let n: Name = "MyNat.add_comm".parse().unwrap();
        assert_eq!(n.segments(), &["MyNat", "add_comm"]);
        assert_eq!(n.to_string(), "MyNat.add_comm");
        assert_eq!(n.parent().unwrap().to_string(), "MyNat");
    }

    #[test]
    fn rejects_malformed() {
        assert!("".parse::<Name>().is_err());
        assert!("a..b".parse::<Name>().is_err());
        assert!("1abc".parse::<Name>().is_err());
        assert!("a.b-c".parse::<Name>().is_err());
    }

    #[test]
    fn accepts_primes_and_unicode() {
        assert!("foo'".parse::<Name>().is_ok());
        assert!("Nat.lt_irrefl!".parse::<Name>().is_ok());
        assert!("α.β₁".parse::<Name>().is_ok());
    }

    proptest! {
        #[test]
        fn render_then_parse_is_identity(segs in prop::collection::vec("[A-Za-z_][A-Za-z0-9_'!?]{0,8}", 1..5)) {
            let n = Name::new(segs.clone()).unwrap();
            let back: Name = n.to_string().parse().unwrap();
            prop_assert_eq!(back, n);
        }
    }
}
