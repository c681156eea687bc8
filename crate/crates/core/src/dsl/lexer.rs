//! Tokenizer for `.tm` files. Keywords are ordinary identifiers; the
//! parser gives them meaning by position.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Str(String),
    /// Numeric literal. `int` is set when the text is plain decimal digits.
    Num {
        text: String,
        value: f64,
        int: Option<u64>,
    },
    LBrace,
    RBrace,
    Comma,
    Dot,
    At,
    Eq,
    Arrow,
    DashArrow,
    Minus,
    Lt,
    Le,
    Gt,
    Ge,
    EqEq,
    /// A character that starts no token, or an unterminated string.
    Bad(String),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Str(s) => write!(f, "string {s:?}"),
            Tok::Num { text, .. } => write!(f, "number `{text}`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::At => f.write_str("`@`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::DashArrow => f.write_str("`-->`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Lt => f.write_str("`<`"),
            Tok::Le => f.write_str("`<=`"),
            Tok::Gt => f.write_str("`>`"),
            Tok::Ge => f.write_str("`>=`"),
            Tok::EqEq => f.write_str("`==`"),
            Tok::Bad(s) => f.write_str(s),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
    /// Length in characters.
    pub length: usize,
    /// Brace nesting depth before this token.
    pub depth: u32,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.bump();
            true
        } else {
            false
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

pub(crate) fn tokenize(text: &str) -> Vec<Token> {
    let mut cur = Cursor {
        chars: text.chars().peekable(),
        line: 1,
        column: 1,
    };
    let mut out = Vec::new();
    let mut depth: u32 = 0;
    loop {
        // Whitespace and comments.
        while let Some(c) = cur.peek() {
            if c.is_whitespace() {
                cur.bump();
            } else if c == '#' {
                while cur.peek().is_some_and(|c| c != '\n') {
                    cur.bump();
                }
            } else {
                break;
            }
        }
        let (line, column) = (cur.line, cur.column);
        let Some(c) = cur.bump() else {
            out.push(Token {
                tok: Tok::Eof,
                line,
                column,
                length: 0,
                depth,
            });
            return out;
        };
        let mut length = 1;
        let tok = match c {
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            ',' => Tok::Comma,
            '.' => Tok::Dot,
            '@' => Tok::At,
            '=' if cur.eat('=') => {
                length = 2;
                Tok::EqEq
            }
            '=' => Tok::Eq,
            '<' if cur.eat('=') => {
                length = 2;
                Tok::Le
            }
            '<' => Tok::Lt,
            '>' if cur.eat('=') => {
                length = 2;
                Tok::Ge
            }
            '>' => Tok::Gt,
            '-' if cur.eat('>') => {
                length = 2;
                Tok::Arrow
            }
            '-' if cur.peek() == Some('-') => {
                cur.bump();
                if cur.eat('>') {
                    length = 3;
                    Tok::DashArrow
                } else {
                    length = 2;
                    Tok::Bad("`--`".to_string())
                }
            }
            '-' if cur.peek().is_some_and(|c| c.is_ascii_digit()) => {
                let (tok, n) = number(&mut cur, String::from("-"));
                length = n;
                tok
            }
            '-' => Tok::Minus,
            '"' => {
                let mut s = String::new();
                let mut closed = false;
                while let Some(c) = cur.bump() {
                    length += 1;
                    match c {
                        '"' => {
                            closed = true;
                            break;
                        }
                        '\\' => {
                            length += 1;
                            match cur.bump() {
                                Some('n') => s.push('\n'),
                                Some('t') => s.push('\t'),
                                Some(other) => s.push(other),
                                None => break,
                            }
                        }
                        '\n' => break,
                        other => s.push(other),
                    }
                }
                if closed {
                    Tok::Str(s)
                } else {
                    Tok::Bad("unterminated string".to_string())
                }
            }
            c if c.is_ascii_digit() => {
                let (tok, n) = number(&mut cur, c.to_string());
                length = n;
                tok
            }
            c if is_ident_start(c) => {
                let mut s = c.to_string();
                while let Some(c) = cur.peek().filter(|c| is_ident_char(*c)) {
                    cur.bump();
                    s.push(c);
                }
                length = s.chars().count();
                Tok::Ident(s)
            }
            other => Tok::Bad(format!("character {other:?}")),
        };
        let before = depth;
        match tok {
            Tok::LBrace => depth += 1,
            Tok::RBrace => depth = depth.saturating_sub(1),
            _ => {}
        }
        out.push(Token {
            tok,
            line,
            column,
            length,
            depth: before,
        });
    }
}

/// Reads the rest of a number whose first character(s) are in `text`.
/// A fraction needs a digit after the dot, so `1.` stays `1` then `.`.
fn number(cur: &mut Cursor<'_>, mut text: String) -> (Tok, usize) {
    while let Some(c) = cur.peek().filter(char::is_ascii_digit) {
        cur.bump();
        text.push(c);
    }
    if cur.peek() == Some('.') {
        let mut ahead = cur.chars.clone();
        ahead.next();
        if ahead.peek().is_some_and(|c| c.is_ascii_digit()) {
            cur.bump();
            text.push('.');
            while let Some(c) = cur.peek().filter(char::is_ascii_digit) {
                cur.bump();
                text.push(c);
            }
        }
    }
    let len = text.chars().count();
    let int = if text.bytes().all(|b| b.is_ascii_digit()) {
        text.parse().ok()
    } else {
        None
    };
    let value: f64 = text.parse().unwrap_or(f64::INFINITY);
    (Tok::Num { text, value, int }, len)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(text: &str) -> Vec<Tok> {
        tokenize(text).into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn arrows_and_numbers() {
        assert_eq!(
            kinds("a->b-->c - 5ms -2.5 # note\n"),
            vec![
                Tok::Ident("a".into()),
                Tok::Arrow,
                Tok::Ident("b".into()),
                Tok::DashArrow,
                Tok::Ident("c".into()),
                Tok::Minus,
                Tok::Num {
                    text: "5".into(),
                    value: 5.0,
                    int: Some(5)
                },
                Tok::Ident("ms".into()),
                Tok::Num {
                    text: "-2.5".into(),
                    value: -2.5,
                    int: None
                },
                Tok::Eof,
            ]
        );
    }

    #[test]
    fn positions_and_depth() {
        let toks = tokenize("x {\n  \"s\\\"q\" }");
        assert_eq!((toks[2].line, toks[2].column, toks[2].length), (2, 3, 6));
        assert_eq!(toks[2].tok, Tok::Str("s\"q".into()));
        assert_eq!(
            toks.iter().map(|t| t.depth).collect::<Vec<_>>(),
            vec![0, 0, 1, 1, 0]
        );
    }

    #[test]
    fn bad_input_becomes_tokens() {
        assert!(matches!(kinds("\"open")[0], Tok::Bad(_)));
        assert!(matches!(kinds("$")[0], Tok::Bad(_)));
        let huge = "9".repeat(30);
        assert!(matches!(kinds(&huge)[0], Tok::Num { int: None, .. }));
    }
}
