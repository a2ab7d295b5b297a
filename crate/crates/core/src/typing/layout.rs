//! Keyboard layouts and their text format:
//!
//! ```text
//! key <id> <label> <output|BACKSPACE|SPACE|ENTER> <x> <y> <w> <h>
//! ```

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{Point, Rect};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LayoutError {
    #[error("layout line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("key {0:?} has no area")]
    EmptyKey(String),
    #[error("keys {0:?} and {1:?} overlap")]
    Overlap(String, String),
    #[error("duplicate key id {0:?}")]
    DuplicateId(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "char", rename_all = "snake_case")]
pub enum KeyOutput {
    Char(char),
    Backspace,
    Space,
    Enter,
}

impl KeyOutput {
    fn token(&self) -> String {
        match self {
            KeyOutput::Char(c) => c.to_string(),
            KeyOutput::Backspace => "BACKSPACE".into(),
            KeyOutput::Space => "SPACE".into(),
            KeyOutput::Enter => "ENTER".into(),
        }
    }

    fn from_token(token: &str) -> Option<Self> {
        match token {
            "BACKSPACE" => Some(KeyOutput::Backspace),
            "SPACE" => Some(KeyOutput::Space),
            "ENTER" => Some(KeyOutput::Enter),
            _ => {
                let mut chars = token.chars();
                match (chars.next(), chars.next()) {
                    (Some(c), None) => Some(KeyOutput::Char(c)),
                    _ => None,
                }
            }
        }
    }

    /// The character this key produces, if any.
    pub fn as_char(&self) -> Option<char> {
        match self {
            KeyOutput::Char(c) => Some(*c),
            KeyOutput::Space => Some(' '),
            KeyOutput::Enter => Some('\n'),
            KeyOutput::Backspace => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Key {
    pub key_id: String,
    pub label: String,
    pub output: KeyOutput,
    pub rect: Rect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyboardLayout {
    keys: Vec<Key>,
}

impl KeyboardLayout {
    pub fn new(keys: Vec<Key>) -> Result<Self, LayoutError> {
        for (i, k) in keys.iter().enumerate() {
            if !k.rect.has_positive_area() {
                return Err(LayoutError::EmptyKey(k.key_id.clone()));
            }
            for other in &keys[..i] {
                if other.key_id == k.key_id {
                    return Err(LayoutError::DuplicateId(k.key_id.clone()));
                }
                if other.rect.overlaps(&k.rect) {
                    return Err(LayoutError::Overlap(other.key_id.clone(), k.key_id.clone()));
                }
            }
        }
        Ok(Self { keys })
    }

    pub fn keys(&self) -> &[Key] {
        &self.keys
    }

    pub fn key(&self, key_id: &str) -> Option<&Key> {
        self.keys.iter().find(|k| k.key_id == key_id)
    }

    /// Key containing `p`, boundary-inclusive.
    pub fn key_at(&self, p: Point) -> Option<&Key> {
        self.keys.iter().find(|k| k.rect.contains(p))
    }

    /// First key producing character `c`.
    pub fn key_for_char(&self, c: char) -> Option<&Key> {
        self.keys.iter().find(|k| k.output.as_char() == Some(c))
    }

    pub fn backspace(&self) -> Option<&Key> {
        self.keys.iter().find(|k| k.output == KeyOutput::Backspace)
    }
}

pub const KEY_SIZE_PX: f64 = 120.0;
pub const KEY_GAP_PX: f64 = 8.0;

/// QWERTY letter rows (staggered by half a key) over a bottom row of
/// Backspace, a five-key-wide Space bar and Enter, centered on a
/// 1920-wide screen.
pub fn default_layout() -> KeyboardLayout {
    let pitch = KEY_SIZE_PX + KEY_GAP_PX;
    let origin_x = (1920.0 - (10.0 * pitch - KEY_GAP_PX)) / 2.0;
    let origin_y = 480.0;
    let mut keys = Vec::new();
    let rows = ["qwertyuiop", "asdfghjkl", "zxcvbnm"];
    for (r, row) in rows.iter().enumerate() {
        let y = origin_y + r as f64 * pitch;
        let x0 = origin_x + r as f64 * pitch / 2.0;
        for (i, c) in row.chars().enumerate() {
            keys.push(Key {
                key_id: c.to_string(),
                label: c.to_ascii_uppercase().to_string(),
                output: KeyOutput::Char(c),
                rect: Rect::new(x0 + i as f64 * pitch, y, KEY_SIZE_PX, KEY_SIZE_PX),
            });
        }
    }
    let y = origin_y + 3.0 * pitch;
    let wide = 5.0 * pitch - KEY_GAP_PX;
    let double = 2.0 * pitch - KEY_GAP_PX;
    let bottom = [
        ("backspace", "Bksp", KeyOutput::Backspace, origin_x, double),
        ("space", "Space", KeyOutput::Space, origin_x + 2.5 * pitch, wide),
        ("enter", "Enter", KeyOutput::Enter, origin_x + 8.0 * pitch, double),
    ];
    for (id, label, output, x, w) in bottom {
        keys.push(Key {
            key_id: id.into(),
            label: label.into(),
            output,
            rect: Rect::new(x, y, w, KEY_SIZE_PX),
        });
    }
    KeyboardLayout::new(keys).expect("default layout is valid")
}

pub fn write_layout(layout: &KeyboardLayout) -> String {
    let mut out = String::new();
    for k in layout.keys() {
        writeln!(
            out,
            "key {} {} {} {} {} {} {}",
            k.key_id,
            k.label,
            k.output.token(),
            k.rect.x,
            k.rect.y,
            k.rect.w,
            k.rect.h
        )
        .unwrap();
    }
    out
}

pub fn parse_layout(text: &str) -> Result<KeyboardLayout, LayoutError> {
    let mut keys = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |message: String| LayoutError::Parse { line: line_no, message };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() || fields[0].starts_with('#') {
            continue;
        }
        let ["key", id, label, output, x, y, w, h] = fields[..] else {
            return Err(err("expected `key <id> <label> <output> <x> <y> <w> <h>`".into()));
        };
        let output = KeyOutput::from_token(output).ok_or_else(|| err(format!("bad output {output:?}")))?;
        let num = |s: &str| s.parse::<f64>().map_err(|_| err(format!("bad number {s:?}")));
        keys.push(Key {
            key_id: id.into(),
            label: label.into(),
            output,
            rect: Rect::new(num(x)?, num(y)?, num(w)?, num(h)?),
        });
    }
    KeyboardLayout::new(keys)
}
