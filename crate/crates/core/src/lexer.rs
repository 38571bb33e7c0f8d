//! Tokenizer for `.seni` sources.
//!
//! Whitespace and `//` line comments are skipped; everything else becomes a
//! token. Concatenating token lexemes with the skipped stretches reproduces
//! the input exactly.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::token::{Span, Token, TokenKind};

/// Lexical error at a 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl core::fmt::Display for LexError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

struct Cursor<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        Cursor {
            src,
            bytes: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn peek2(&self) -> Option<u8> {
        self.bytes.get(self.pos + 1).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek()?;
        self.pos += 1;
        if b == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(b)
    }

    fn error(&self, message: String) -> LexError {
        LexError {
            line: self.line,
            col: self.col,
            message,
        }
    }
}

fn keyword_kind(word: &str) -> Option<TokenKind> {
    Some(match word {
        "system" => TokenKind::KwSystem,
        "record" => TokenKind::KwRecord,
        "state" => TokenKind::KwState,
        "action" => TokenKind::KwAction,
        "init" => TokenKind::KwInit,
        "spec" => TokenKind::KwSpec,
        "prop" => TokenKind::KwProp,
        "func" => TokenKind::KwFunc,
        "import" => TokenKind::KwImport,
        "refines" => TokenKind::KwRefines,
        "static" => TokenKind::KwStatic,
        "property" => TokenKind::KwProperty,
        "always" => TokenKind::KwAlways,
        "null" => TokenKind::KwNull,
        "true" => TokenKind::KwTrue,
        "false" => TokenKind::KwFalse,
        "if" => TokenKind::KwIf,
        "else" => TokenKind::KwElse,
        "int" => TokenKind::TyInt,
        "bool" => TokenKind::TyBool,
        "string" => TokenKind::TyString,
        "mod" => TokenKind::Mod,
        _ => return None,
    })
}

fn is_ident_start(b: u8) -> bool {
    b.is_ascii_alphabetic() || b == b'_'
}

fn is_ident_continue(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

/// Tokenize a source text. The returned list does not include an EOF token.
pub fn tokenize(source: &str) -> Result<Vec<Token>, LexError> {
    let mut cur = Cursor::new(source);
    let mut out = Vec::new();

    loop {
        // skip whitespace and comments
        loop {
            match cur.peek() {
                Some(b) if b.is_ascii_whitespace() => {
                    cur.bump();
                }
                Some(b'/') if cur.peek2() == Some(b'/') => {
                    while let Some(b) = cur.peek() {
                        if b == b'\n' {
                            break;
                        }
                        cur.bump();
                    }
                }
                _ => break,
            }
        }

        let Some(b) = cur.peek() else { break };
        let lo = cur.pos;
        let line = cur.line;
        let col = cur.col;

        let kind = match b {
            b'{' => {
                cur.bump();
                TokenKind::LBrace
            }
            b'}' => {
                cur.bump();
                TokenKind::RBrace
            }
            b'(' => {
                cur.bump();
                TokenKind::LParen
            }
            b')' => {
                cur.bump();
                TokenKind::RParen
            }
            b'[' => {
                cur.bump();
                TokenKind::LBracket
            }
            b']' => {
                cur.bump();
                TokenKind::RBracket
            }
            b',' => {
                cur.bump();
                TokenKind::Comma
            }
            b';' => {
                cur.bump();
                TokenKind::Semi
            }
            b'.' => {
                cur.bump();
                TokenKind::Dot
            }
            b'@' => {
                cur.bump();
                TokenKind::At
            }
            b':' => {
                cur.bump();
                if cur.peek() == Some(b':') {
                    cur.bump();
                    TokenKind::ColonColon
                } else {
                    TokenKind::Colon
                }
            }
            b'-' => {
                cur.bump();
                if cur.peek() == Some(b'>') {
                    cur.bump();
                    TokenKind::Arrow
                } else {
                    TokenKind::Minus
                }
            }
            b'=' => {
                cur.bump();
                if cur.peek() == Some(b'>') {
                    cur.bump();
                    TokenKind::Implies
                } else {
                    TokenKind::Eq
                }
            }
            b'/' => {
                cur.bump();
                if cur.peek() == Some(b'=') {
                    cur.bump();
                    TokenKind::Neq
                } else {
                    TokenKind::Slash
                }
            }
            b'&' => {
                cur.bump();
                TokenKind::Amp
            }
            b'|' => {
                cur.bump();
                if cur.peek() == Some(b'|') {
                    cur.bump();
                    TokenKind::PipePipe
                } else {
                    TokenKind::Pipe
                }
            }
            b'!' => {
                cur.bump();
                TokenKind::Bang
            }
            b'+' => {
                cur.bump();
                TokenKind::Plus
            }
            b'*' => {
                cur.bump();
                TokenKind::Star
            }
            b'"' => {
                cur.bump();
                loop {
                    match cur.peek() {
                        None | Some(b'\n') => {
                            return Err(LexError {
                                line,
                                col,
                                message: "unterminated string literal".to_string(),
                            })
                        }
                        Some(b'"') => {
                            cur.bump();
                            break;
                        }
                        _ => {
                            cur.bump();
                        }
                    }
                }
                TokenKind::StrLit
            }
            b'0'..=b'9' => {
                while matches!(cur.peek(), Some(d) if d.is_ascii_digit()) {
                    cur.bump();
                }
                TokenKind::IntLit
            }
            b if is_ident_start(b) => {
                while matches!(cur.peek(), Some(c) if is_ident_continue(c)) {
                    cur.bump();
                }
                keyword_kind(&cur.src[lo..cur.pos]).unwrap_or(TokenKind::Ident)
            }
            other => {
                return Err(cur.error(format!(
                    "unexpected character `{}`",
                    core::ascii::escape_default(other)
                )))
            }
        };

        out.push(Token {
            kind,
            lexeme: cur.src[lo..cur.pos].to_string(),
            span: Span {
                lo,
                hi: cur.pos,
                line,
                col,
            },
        });
    }

    Ok(out)
}
