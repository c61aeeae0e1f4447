//! The dictionary of token meanings: candidate senses per symbol or
//! semantic macro, their structural signatures, and CAS translation
//! patterns. Loaded from JSON and validated eagerly.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::mst::MacroArities;

/// Target CAS dialect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dialect {
    Maple,
    Mathematica,
}

impl Dialect {
    pub const ALL: [Dialect; 2] = [Dialect::Maple, Dialect::Mathematica];

    pub fn name(self) -> &'static str {
        match self {
            Dialect::Maple => "maple",
            Dialect::Mathematica => "mathematica",
        }
    }
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Dialect {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "maple" => Ok(Dialect::Maple),
            "mathematica" => Ok(Dialect::Mathematica),
            other => Err(format!("unknown dialect {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Function,
    Constant,
    Variable,
    Operator,
}

/// Expected structural shape of an occurrence of this sense: explicit macro
/// params, superscript/subscript params on the plain-letter form, and
/// trailing parenthesized arguments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Signature {
    #[serde(default)]
    pub params: usize,
    #[serde(default, rename = "sup-params")]
    pub sup_params: usize,
    #[serde(default, rename = "sub-params")]
    pub sub_params: usize,
    #[serde(default)]
    pub args: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sense {
    pub id: String,
    pub role: Role,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub signature: Signature,
    /// Unnormalized weight; the tagger normalizes via softmax.
    #[serde(default = "default_prior")]
    pub prior: f64,
    #[serde(default)]
    pub translations: BTreeMap<Dialect, String>,
}

fn default_prior() -> f64 {
    0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntryKind {
    Symbol,
    SemanticMacro,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Entry {
    pub key: String,
    pub kind: EntryKind,
    pub senses: Vec<Sense>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lexicon {
    pub version: u32,
    /// Names each dialect reserves; emitting one of these as a plain
    /// variable would silently change meaning (the `gamma` trap).
    #[serde(default)]
    pub reserved: BTreeMap<Dialect, Vec<String>>,
    pub entries: Vec<Entry>,
}

#[derive(Debug, thiserror::Error)]
pub enum LexiconError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("schema error at {pointer}: {message}")]
    Schema { pointer: String, message: String },
    #[error("sense {0}: translation pattern references a placeholder outside its signature")]
    Placeholder(String),
}

impl Lexicon {
    /// Load and eagerly validate a lexicon file.
    pub fn load(path: impl AsRef<Path>) -> Result<Lexicon, LexiconError> {
        let text = std::fs::read_to_string(path)?;
        Lexicon::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Lexicon, LexiconError> {
        let lexicon: Lexicon = serde_json::from_str(text).map_err(|e| LexiconError::Schema {
            pointer: format!("line {}, column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        lexicon.validate()?;
        Ok(lexicon)
    }

    /// The dictionary shipped with the crate.
    pub fn bundled() -> Lexicon {
        Lexicon::from_json(include_str!("../data/lexicon.json"))
            .expect("bundled lexicon must be valid")
    }

    fn validate(&self) -> Result<(), LexiconError> {
        let mut seen = std::collections::HashSet::new();
        for (i, entry) in self.entries.iter().enumerate() {
            let ptr = format!("/entries/{i}");
            if !seen.insert(entry.key.as_str()) {
                return Err(LexiconError::Schema {
                    pointer: ptr,
                    message: format!("duplicate key {:?}", entry.key),
                });
            }
            if entry.senses.is_empty() {
                return Err(LexiconError::Schema {
                    pointer: ptr,
                    message: "entry has no senses".into(),
                });
            }
            for sense in &entry.senses {
                if !(0.0..=1.0).contains(&sense.prior) || !sense.prior.is_finite() {
                    return Err(LexiconError::Schema {
                        pointer: format!("{ptr}/senses"),
                        message: format!("prior of {} outside [0,1]", sense.id),
                    });
                }
                if entry.kind == EntryKind::SemanticMacro {
                    for d in Dialect::ALL {
                        if !sense.translations.contains_key(&d) {
                            return Err(LexiconError::Schema {
                                pointer: format!("{ptr}/senses"),
                                message: format!(
                                    "macro sense {} lacks a {d} translation",
                                    sense.id
                                ),
                            });
                        }
                    }
                }
                for template in sense.translations.values() {
                    if template.is_empty() {
                        return Err(LexiconError::Schema {
                            pointer: format!("{ptr}/senses"),
                            message: format!("empty template in {}", sense.id),
                        });
                    }
                    check_placeholders(template, &sense.signature)
                        .map_err(|_| LexiconError::Placeholder(sense.id.clone()))?;
                }
            }
        }
        Ok(())
    }

    /// All senses for a key, in declaration order.
    pub fn lookup(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }

    pub fn reserved_names(&self, dialect: Dialect) -> &[String] {
        self.reserved.get(&dialect).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Param/arg arities of semantic-macro entries, for the parser.
    pub fn macro_arities(&self) -> MacroArities {
        self.entries
            .iter()
            .filter(|e| e.kind == EntryKind::SemanticMacro)
            .filter_map(|e| {
                let sig = e.senses.first()?.signature;
                let name = e.key.strip_prefix('\\')?;
                Some((name.to_string(), (sig.params, sig.args)))
            })
            .collect()
    }

    /// A sense by id, searching all entries.
    pub fn sense_by_id(&self, id: &str) -> Option<&Sense> {
        self.entries
            .iter()
            .flat_map(|e| e.senses.iter())
            .find(|s| s.id == id)
    }
}

/// Placeholder indices in `template` (`$p0..`, `$a0..`, `$sub0..`,
/// `$sup0..`) checked against the signature.
fn check_placeholders(template: &str, sig: &Signature) -> Result<(), String> {
    for (kind, index) in iter_placeholders(template) {
        let limit = match kind {
            "p" => sig.params + sig.sup_params + sig.sub_params,
            "a" => sig.args,
            _ => unreachable!(),
        };
        if index >= limit {
            return Err(format!("${kind}{index} out of range"));
        }
    }
    Ok(())
}

pub(crate) fn iter_placeholders(template: &str) -> Vec<(&'static str, usize)> {
    let mut found = Vec::new();
    let bytes = template.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'$' && i + 1 < bytes.len() {
            let kind = match bytes[i + 1] {
                b'p' => "p",
                b'a' => "a",
                _ => {
                    i += 1;
                    continue;
                }
            };
            let mut j = i + 2;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            if j > i + 2 {
                let index: usize = template[i + 2..j].parse().unwrap_or(usize::MAX);
                found.push((kind, index));
                i = j;
                continue;
            }
        }
        i += 1;
    }
    found
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_lexicon_loads() {
        let lex = Lexicon::bundled();
        assert!(lex.entries.len() >= 12, "got {}", lex.entries.len());
        for key in ["\\JacobiP", "\\gamma", "\\cos", "e"] {
            assert!(lex.lookup(key).is_some(), "missing {key}");
        }
    }

    #[test]
    fn gamma_senses_in_order() {
        let lex = Lexicon::bundled();
        let entry = lex.lookup("\\gamma").unwrap();
        let ids: Vec<_> = entry.senses.iter().map(|s| s.id.as_str()).collect();
        assert_eq!(ids, vec!["const:EulerMascheroni", "var:gamma"]);
    }

    #[test]
    fn jacobi_macro_signature() {
        let lex = Lexicon::bundled();
        let entry = lex.lookup("\\JacobiP").unwrap();
        assert_eq!(entry.kind, EntryKind::SemanticMacro);
        let sig = entry.senses[0].signature;
        assert_eq!((sig.params, sig.args), (3, 1));
    }

    #[test]
    fn missing_key() {
        assert!(Lexicon::bundled().lookup("\\zzz").is_none());
    }

    #[test]
    fn empty_entries_is_valid() {
        let lex = Lexicon::from_json(r#"{"version":1,"entries":[]}"#).unwrap();
        assert!(lex.entries.is_empty());
        assert!(lex.lookup("x").is_none());
    }

    #[test]
    fn out_of_range_placeholder_rejected() {
        let json = r#"{"version":1,"entries":[{"key":"\\F","kind":"semantic-macro","senses":[{
            "id":"t:F","role":"function","signature":{"params":0,"args":1},
            "translations":{"maple":"F($a3)","mathematica":"F[$a0]"}}]}]}"#;
        assert!(matches!(
            Lexicon::from_json(json),
            Err(LexiconError::Placeholder(_))
        ));
    }

    #[test]
    fn duplicate_keys_rejected() {
        let json = r#"{"version":1,"entries":[
            {"key":"x","kind":"symbol","senses":[{"id":"a","role":"variable"}]},
            {"key":"x","kind":"symbol","senses":[{"id":"b","role":"variable"}]}]}"#;
        assert!(matches!(
            Lexicon::from_json(json),
            Err(LexiconError::Schema { .. })
        ));
    }

    #[test]
    fn serialization_round_trip() {
        let lex = Lexicon::bundled();
        let text = serde_json::to_string(&lex).unwrap();
        let reloaded = Lexicon::from_json(&text).unwrap();
        assert_eq!(lex, reloaded);
    }

    #[test]
    fn placeholder_closure() {
        // instantiating every template with signature-many dummies leaves no $
        let lex = Lexicon::bundled();
        for entry in &lex.entries {
            for sense in &entry.senses {
                let sig = sense.signature;
                let params = vec!["d".to_string(); sig.params + sig.sup_params + sig.sub_params];
                let args = vec!["d".to_string(); sig.args];
                for template in sense.translations.values() {
                    let out =
                        crate::translator::instantiate_pattern(template, &params, &args).unwrap();
                    assert!(!out.contains('$'), "{}: {}", sense.id, out);
                }
            }
        }
    }
}
