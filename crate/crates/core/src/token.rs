//! Tokens and source positions.

use alloc::string::String;

/// Byte range plus 1-based line/column of a token or node in its source file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Span {
    pub lo: usize,
    pub hi: usize,
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub const DUMMY: Span = Span {
        lo: 0,
        hi: 0,
        line: 0,
        col: 0,
    };

    /// Smallest span covering both `self` and `other`.
    pub fn merge(self, other: Span) -> Span {
        let (line, col) = if (other.line, other.col) < (self.line, self.col) && other.line != 0 {
            (other.line, other.col)
        } else {
            (self.line, self.col)
        };
        Span {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
            line,
            col,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    // keywords
    KwSystem,
    KwRecord,
    KwState,
    KwAction,
    KwInit,
    KwSpec,
    KwProp,
    KwFunc,
    KwImport,
    KwRefines,
    KwStatic,
    KwProperty,
    KwAlways,
    KwNull,
    KwTrue,
    KwFalse,
    KwIf,
    KwElse,
    // primitive type names
    TyInt,
    TyBool,
    TyString,
    // literals and names
    Ident,
    IntLit,
    StrLit,
    // punctuation
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Colon,
    ColonColon,
    Dot,
    At,
    Arrow,
    // operators
    Eq,
    Neq,
    Amp,
    Pipe,
    PipePipe,
    Bang,
    Plus,
    Minus,
    Star,
    Slash,
    Mod,
    Implies,
    Eof,
}

impl TokenKind {
    /// Human-readable name used in diagnostics.
    pub fn describe(self) -> &'static str {
        match self {
            TokenKind::KwSystem => "`system`",
            TokenKind::KwRecord => "`record`",
            TokenKind::KwState => "`state`",
            TokenKind::KwAction => "`action`",
            TokenKind::KwInit => "`init`",
            TokenKind::KwSpec => "`spec`",
            TokenKind::KwProp => "`prop`",
            TokenKind::KwFunc => "`func`",
            TokenKind::KwImport => "`import`",
            TokenKind::KwRefines => "`refines`",
            TokenKind::KwStatic => "`static`",
            TokenKind::KwProperty => "`property`",
            TokenKind::KwAlways => "`always`",
            TokenKind::KwNull => "`null`",
            TokenKind::KwTrue => "`true`",
            TokenKind::KwFalse => "`false`",
            TokenKind::KwIf => "`if`",
            TokenKind::KwElse => "`else`",
            TokenKind::TyInt => "`int`",
            TokenKind::TyBool => "`bool`",
            TokenKind::TyString => "`string`",
            TokenKind::Ident => "identifier",
            TokenKind::IntLit => "integer literal",
            TokenKind::StrLit => "string literal",
            TokenKind::LBrace => "`{`",
            TokenKind::RBrace => "`}`",
            TokenKind::LParen => "`(`",
            TokenKind::RParen => "`)`",
            TokenKind::LBracket => "`[`",
            TokenKind::RBracket => "`]`",
            TokenKind::Comma => "`,`",
            TokenKind::Semi => "`;`",
            TokenKind::Colon => "`:`",
            TokenKind::ColonColon => "`::`",
            TokenKind::Dot => "`.`",
            TokenKind::At => "`@`",
            TokenKind::Arrow => "`->`",
            TokenKind::Eq => "`=`",
            TokenKind::Neq => "`/=`",
            TokenKind::Amp => "`&`",
            TokenKind::Pipe => "`|`",
            TokenKind::PipePipe => "`||`",
            TokenKind::Bang => "`!`",
            TokenKind::Plus => "`+`",
            TokenKind::Minus => "`-`",
            TokenKind::Star => "`*`",
            TokenKind::Slash => "`/`",
            TokenKind::Mod => "`mod`",
            TokenKind::Implies => "`=>`",
            TokenKind::Eof => "end of file",
        }
    }
}

/// One lexical token. `line`/`col` point at its first character.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub span: Span,
}

impl Token {
    pub fn line(&self) -> u32 {
        self.span.line
    }

    pub fn col(&self) -> u32 {
        self.span.col
    }
}
