//! Parser for the textual tree form `Root(color(child),...)`.
//!
//! ```text
//! tree  := SYMBOL [ '(' child (',' child)* ')' ]
//! child := COLOR '(' tree ')'
//! COLOR := N | N '>' N
//! ```
//!
//! Symbols are runs of characters other than whitespace, `(`, `)`, `,` and
//! `>`. The result is canonicalized.

use super::{Color, Scdt, TreeError};

struct Cursor {
    chars: Vec<char>,
    pos: usize,
}

impl Cursor {
    fn err(&self, message: impl Into<String>) -> TreeError {
        TreeError::Syntax { column: self.pos + 1, message: message.into() }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn expect(&mut self, c: char) -> Result<(), TreeError> {
        match self.peek() {
            Some(x) if x == c => {
                self.pos += 1;
                Ok(())
            }
            Some(x) => Err(self.err(format!("expected `{c}`, found `{x}`"))),
            None => Err(self.err(format!("expected `{c}`, found end of input"))),
        }
    }

    fn symbol(&mut self) -> Result<String, TreeError> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_whitespace() || "(),>".contains(c) {
                break;
            }
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a symbol"));
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    fn index(&mut self) -> Result<u32, TreeError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        match s.parse::<u32>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => {
                self.pos = start;
                Err(self.err("expected a positive edge index"))
            }
        }
    }

    fn color(&mut self) -> Result<Color, TreeError> {
        let n = self.index()?;
        if self.peek() == Some('>') {
            self.pos += 1;
            let m = self.index()?;
            Ok(Color::Flow(n, m))
        } else {
            Ok(Color::Param(n))
        }
    }

    fn tree(&mut self) -> Result<Scdt, TreeError> {
        let root = self.symbol()?;
        let mut children = Vec::new();
        if self.peek() == Some('(') {
            self.pos += 1;
            loop {
                let c = self.color()?;
                self.expect('(')?;
                let t = self.tree()?;
                self.expect(')')?;
                children.push((c, t));
                match self.peek() {
                    Some(',') => self.pos += 1,
                    _ => break,
                }
            }
            self.expect(')')?;
        }
        Ok(Scdt::new(root, children))
    }
}

/// Parses the textual form produced by `Scdt`'s `Display`. Surrounding
/// whitespace is ignored; anything else after the tree is an error.
pub fn parse_scdt(text: &str) -> Result<Scdt, TreeError> {
    let trimmed = text.trim();
    let offset = text.len() - text.trim_start().len();
    let mut cur = Cursor { chars: trimmed.chars().collect(), pos: 0 };
    let t = cur.tree().map_err(|e| shift(e, offset))?;
    if cur.pos != cur.chars.len() {
        return Err(shift(cur.err("trailing input"), offset));
    }
    Ok(t)
}

fn shift(e: TreeError, offset: usize) -> TreeError {
    match e {
        TreeError::Syntax { column, message } => TreeError::Syntax { column: column + offset, message },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_copy_sig() {
        let s = "GetModuleFileName(1(0),2>1(CopyFile))";
        assert_eq!(parse_scdt(s).unwrap().to_string(), s);
    }

    #[test]
    fn reorders_to_canonical() {
        let t = parse_scdt("f(2(b),1(a))").unwrap();
        assert_eq!(t.to_string(), "f(1(a),2(b))");
    }

    #[test]
    fn negative_literal_symbol() {
        assert_eq!(parse_scdt("F(1(-3))").unwrap().children()[0].1.root(), "-3");
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_scdt(""), Err(TreeError::Syntax { .. })));
        assert!(matches!(parse_scdt("f(0(a))"), Err(TreeError::Syntax { .. })));
        assert!(matches!(parse_scdt("f(1(a)"), Err(TreeError::Syntax { .. })));
        assert!(matches!(parse_scdt("f g"), Err(TreeError::Syntax { .. })));
        assert!(matches!(parse_scdt("f()"), Err(TreeError::Syntax { .. })));
    }
}
