use std::collections::HashMap;

use super::Token;

pub const PAD_ID: u32 = 0;
pub const UNK_ID: u32 = 1;
pub const PAD_TOKEN: &str = "<pad>";
pub const UNK_TOKEN: &str = "<unk>";

/// Frozen token-to-id bijection. PAD and UNK are always present at ids 0
/// and 1; remaining ids follow first-insertion order and are stable for
/// the lifetime of the vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    id_of: HashMap<String, u32>,
    tokens: Vec<String>,
}

impl Vocabulary {
    pub fn new() -> Self {
        let mut v = Vocabulary {
            id_of: HashMap::new(),
            tokens: Vec::new(),
        };
        v.insert(PAD_TOKEN);
        v.insert(UNK_TOKEN);
        v
    }

    /// Builds a vocabulary from token streams in iteration order.
    pub fn from_tokens<'a, I: IntoIterator<Item = &'a Token>>(tokens: I) -> Self {
        let mut v = Vocabulary::new();
        for t in tokens {
            v.insert(t.as_str());
        }
        v
    }

    fn insert(&mut self, text: &str) -> u32 {
        if let Some(&id) = self.id_of.get(text) {
            return id;
        }
        let id = self.tokens.len() as u32;
        self.tokens.push(text.to_string());
        self.id_of.insert(text.to_string(), id);
        id
    }

    /// Adds a token if absent, returning its id. Intended for vocabulary
    /// construction; ids already handed out never move.
    pub fn add(&mut self, token: &Token) -> u32 {
        self.insert(token.as_str())
    }

    /// Id for a token text, or UNK when absent.
    pub fn id(&self, text: &str) -> u32 {
        self.id_of.get(text).copied().unwrap_or(UNK_ID)
    }

    pub fn contains(&self, text: &str) -> bool {
        self.id_of.contains_key(text)
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false // PAD and UNK are always present
    }

    /// Tokens in id order, PAD and UNK first.
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Rebuilds a vocabulary from an id-ordered token list, validating the
    /// special-token layout.
    pub fn from_id_ordered(tokens: Vec<String>) -> Result<Self, String> {
        if tokens.len() < 2 || tokens[0] != PAD_TOKEN || tokens[1] != UNK_TOKEN {
            return Err("vocabulary must start with <pad>, <unk>".to_string());
        }
        let mut id_of = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if id_of.insert(t.clone(), i as u32).is_some() {
                return Err(format!("duplicate vocabulary entry {t:?}"));
            }
        }
        Ok(Vocabulary { id_of, tokens })
    }
}

impl Default for Vocabulary {
    fn default() -> Self {
        Vocabulary::new()
    }
}
