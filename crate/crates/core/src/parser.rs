//! Recursive descent parser for `.seni` programs.
//!
//! Spec expressions bind `always` tightest, then `.` (sequencing,
//! left-associative), then `|` (choice), then `||` (parallel). Boolean
//! expressions bind `!` tighter than `&` than `|` than `=>`, with `=` and
//! `/=` binding tighter than `!`. The first error aborts; there is no
//! recovery.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::ast::*;
use crate::token::{Span, Token, TokenKind};

/// Parse error: what was expected, what was found, and where.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub expected: Vec<String>,
    pub found: String,
    pub span: Span,
}

impl ParseError {
    pub fn message(&self) -> String {
        if self.expected.is_empty() {
            return self.found.clone();
        }
        let mut exp = String::new();
        for (i, e) in self.expected.iter().enumerate() {
            if i > 0 {
                exp.push_str(if i + 1 == self.expected.len() {
                    " or "
                } else {
                    ", "
                });
            }
            exp.push_str(e);
        }
        format!("expected {}, found {}", exp, self.found)
    }
}

impl core::fmt::Display for ParseError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(
            f,
            "{}:{}: {}",
            self.span.line,
            self.span.col,
            self.message()
        )
    }
}

pub type ParseResult<T> = Result<T, ParseError>;

/// Parse a token stream produced by [`crate::lexer::tokenize`].
pub fn parse(tokens: Vec<Token>) -> ParseResult<ProgramAst> {
    Parser::new(tokens).parse_program()
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    eof: Token,
}

impl Parser {
    fn new(tokens: Vec<Token>) -> Self {
        let eof_span = tokens.last().map_or(
            Span {
                lo: 0,
                hi: 0,
                line: 1,
                col: 1,
            },
            |t| Span {
                lo: t.span.hi,
                hi: t.span.hi,
                line: t.span.line,
                col: t.span.col + t.lexeme.len() as u32,
            },
        );
        Parser {
            tokens,
            pos: 0,
            eof: Token {
                kind: TokenKind::Eof,
                lexeme: String::new(),
                span: eof_span,
            },
        }
    }

    fn peek(&self) -> &Token {
        self.tokens.get(self.pos).unwrap_or(&self.eof)
    }

    fn peek_kind(&self) -> TokenKind {
        self.peek().kind
    }

    fn peek_ahead(&self, n: usize) -> TokenKind {
        self.tokens
            .get(self.pos + n)
            .map_or(TokenKind::Eof, |t| t.kind)
    }

    fn advance(&mut self) -> Token {
        let t = self.peek().clone();
        if self.pos < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, kind: TokenKind) -> bool {
        if self.peek_kind() == kind {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn error<T>(&self, expected: &[&str]) -> ParseResult<T> {
        let tok = self.peek();
        let found = match tok.kind {
            TokenKind::Eof => "end of file".to_string(),
            _ => format!("`{}`", tok.lexeme),
        };
        Err(ParseError {
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found,
            span: tok.span,
        })
    }

    fn expect(&mut self, kind: TokenKind) -> ParseResult<Token> {
        if self.peek_kind() == kind {
            Ok(self.advance())
        } else {
            self.error(&[kind.describe()])
        }
    }

    fn expect_ident(&mut self) -> ParseResult<(String, Span)> {
        let tok = self.expect(TokenKind::Ident)?;
        Ok((tok.lexeme, tok.span))
    }

    // ---- program structure ----

    fn parse_program(&mut self) -> ParseResult<ProgramAst> {
        let mut imports: Vec<ImportDecl> = Vec::new();
        while self.peek_kind() == TokenKind::KwImport {
            self.advance();
            let (name, span) = self.expect_ident()?;
            self.expect(TokenKind::Semi)?;
            if imports.iter().any(|i| i.name == name) {
                return Err(ParseError {
                    expected: Vec::new(),
                    found: format!("duplicate import `{}`", name),
                    span,
                });
            }
            imports.push(ImportDecl { name, span });
        }

        let mut systems = Vec::new();
        while self.peek_kind() != TokenKind::Eof {
            systems.push(self.parse_system()?);
        }
        Ok(ProgramAst { imports, systems })
    }

    fn parse_system(&mut self) -> ParseResult<SystemAst> {
        let start = self.expect(TokenKind::KwSystem)?.span;
        let (name, name_span) = self.expect_ident()?;
        let refines = if self.eat(TokenKind::KwRefines) {
            let (parent, span) = self.expect_ident()?;
            Some(ImportDecl { name: parent, span })
        } else {
            None
        };
        self.expect(TokenKind::LBrace)?;

        let mut sys = SystemAst {
            name,
            name_span,
            refines,
            records: Vec::new(),
            state_vars: Vec::new(),
            instance_vars: Vec::new(),
            actions: Vec::new(),
            init: None,
            specs: Vec::new(),
            props: Vec::new(),
            static_props: Vec::new(),
            funcs: Vec::new(),
            span: start,
        };

        loop {
            match self.peek_kind() {
                TokenKind::RBrace => break,
                TokenKind::KwRecord => sys.records.push(self.parse_record()?),
                TokenKind::KwState => sys.state_vars.push(self.parse_state_var()?),
                TokenKind::LBracket => sys.instance_vars.push(self.parse_instance_var()?),
                TokenKind::KwAction => sys.actions.push(self.parse_action()?),
                TokenKind::KwInit => {
                    let init_span = self.peek().span;
                    let init = self.parse_init()?;
                    if sys.init.is_some() {
                        return Err(ParseError {
                            expected: Vec::new(),
                            found: "duplicate `init` declaration".to_string(),
                            span: init_span,
                        });
                    }
                    sys.init = Some(init);
                }
                TokenKind::KwSpec => sys.specs.push(self.parse_spec()?),
                TokenKind::KwProp => sys.props.push(self.parse_prop()?),
                TokenKind::KwStatic => sys.static_props.push(self.parse_static_prop()?),
                TokenKind::KwFunc => sys.funcs.push(self.parse_func()?),
                _ => return self.error(&["declaration", "`}`"]),
            }
        }
        let end = self.expect(TokenKind::RBrace)?.span;
        sys.span = start.merge(end);
        Ok(sys)
    }

    fn parse_record(&mut self) -> ParseResult<RecordDecl> {
        let start = self.advance().span; // `record`
        let (name, _) = self.expect_ident()?;
        self.expect(TokenKind::LBrace)?;
        let mut fields = Vec::new();
        while self.peek_kind() != TokenKind::RBrace {
            let ty = self.parse_type()?;
            let (fname, fspan) = self.expect_ident()?;
            let default = if self.eat(TokenKind::Colon) {
                Some(self.parse_expr()?)
            } else {
                None
            };
            let span = ty.span().merge(fspan);
            fields.push(FieldDecl {
                ty,
                name: fname,
                default,
                span,
            });
            // `,` and `;` are interchangeable separators; the last one may be omitted
            if !self.eat(TokenKind::Comma) && !self.eat(TokenKind::Semi) {
                break;
            }
        }
        let end = self.expect(TokenKind::RBrace)?.span;
        Ok(RecordDecl {
            name,
            fields,
            span: start.merge(end),
        })
    }

    fn parse_state_var(&mut self) -> ParseResult<StateVarDecl> {
        let start = self.advance().span; // `state`
        let ty = self.parse_type()?;
        let (name, nspan) = self.expect_ident()?;
        let default = if self.eat(TokenKind::Colon) {
            Some(self.parse_expr()?)
        } else {
            None
        };
        let end = self.expect(TokenKind::Semi)?.span;
        let _ = nspan;
        Ok(StateVarDecl {
            ty,
            name,
            default,
            span: start.merge(end),
        })
    }

    fn parse_instance_var(&mut self) -> ParseResult<InstanceVarDecl> {
        let start = self.advance().span; // `[`
        let elem = self.peek().clone();
        if elem.kind != TokenKind::Ident {
            return self.error(&["system name"]);
        }
        self.advance();
        self.expect(TokenKind::RBracket)?;
        let (name, _) = self.expect_ident()?;
        let end = self.expect(TokenKind::Semi)?.span;
        Ok(InstanceVarDecl {
            elem_system: elem.lexeme,
            elem_span: elem.span,
            name,
            span: start.merge(end),
        })
    }

    fn parse_action(&mut self) -> ParseResult<ActionDecl> {
        let start = self.advance().span; // `action`
        let (name, name_span) = self.expect_ident()?;
        self.expect(TokenKind::LBrace)?;
        let body = self.parse_stmt_list()?;
        let end = self.expect(TokenKind::RBrace)?.span;
        Ok(ActionDecl {
            name,
            name_span,
            body,
            span: start.merge(end),
        })
    }

    fn parse_init(&mut self) -> ParseResult<InitDecl> {
        let start = self.advance().span; // `init`
        self.expect(TokenKind::LParen)?;
        let mut params = Vec::new();
        if self.peek_kind() != TokenKind::RParen {
            loop {
                let ty = self.parse_type()?;
                let (name, nspan) = self.expect_ident()?;
                let span = ty.span().merge(nspan);
                params.push(ParamDecl { ty, name, span });
                if !self.eat(TokenKind::Comma) {
                    break;
                }
            }
        }
        self.expect(TokenKind::RParen)?;
        self.expect(TokenKind::LBrace)?;
        let body = self.parse_stmt_list()?;
        let end = self.expect(TokenKind::RBrace)?.span;
        Ok(InitDecl {
            params,
            body,
            span: start.merge(end),
        })
    }

    /// Assignment statements until the closing brace. Terminating `;` is
    /// accepted but not required (Listing-style sources omit some).
    fn parse_stmt_list(&mut self) -> ParseResult<Vec<Assign>> {
        let mut stmts = Vec::new();
        while self.peek_kind() != TokenKind::RBrace && self.peek_kind() != TokenKind::Eof {
            stmts.push(self.parse_assign()?);
        }
        Ok(stmts)
    }

    fn parse_assign(&mut self) -> ParseResult<Assign> {
        let target = match self.peek_kind() {
            TokenKind::At => {
                let at = self.advance().span;
                let mut path = Vec::new();
                let mut span = at;
                self.expect(TokenKind::Dot)?;
                loop {
                    let (part, pspan) = self.expect_ident()?;
                    path.push(part);
                    span = span.merge(pspan);
                    if !self.eat(TokenKind::Dot) {
                        break;
                    }
                }
                AssignTarget::State { path, span }
            }
            TokenKind::Ident => {
                let (name, span) = self.expect_ident()?;
                AssignTarget::Name { name, span }
            }
            _ => return self.error(&["`@`", "identifier"]),
        };
        self.expect(TokenKind::Colon)?;
        let value = self.parse_expr()?;
        self.eat(TokenKind::Semi);
        let span = target.span().merge(value.span());
        Ok(Assign {
            target,
            value,
            span,
        })
    }

    fn parse_spec(&mut self) -> ParseResult<SpecDecl> {
        let start = self.advance().span; // `spec`
        let (name, name_span) = self.expect_ident()?;
        self.expect(TokenKind::LBrace)?;
        let body = self.parse_spec_expr()?;
        let end = self.expect(TokenKind::RBrace)?.span;
        Ok(SpecDecl {
            name,
            name_span,
            body,
            span: start.merge(end),
        })
    }

    fn parse_prop(&mut self) -> ParseResult<PropDecl> {
        let start = self.advance().span; // `prop`
        let (name, name_span) = self.expect_ident()?;
        self.expect(TokenKind::LBrace)?;
        let body = self.parse_expr()?;
        let end = self.expect(TokenKind::RBrace)?.span;
        Ok(PropDecl {
            name,
            name_span,
            body,
            span: start.merge(end),
        })
    }

    fn parse_static_prop(&mut self) -> ParseResult<StaticPropDecl> {
        let start = self.advance().span; // `static`
        self.expect(TokenKind::KwProperty)?;
        let (name, name_span) = self.expect_ident()?;
        self.expect(TokenKind::LBrace)?;
        // a leading `Name =>` selects the spec whose state space is checked
        let spec = if self.peek_kind() == TokenKind::Ident
            && self.peek_ahead(1) == TokenKind::Implies
        {
            let (sname, sspan) = self.expect_ident()?;
            self.advance(); // `=>`
            Some(ImportDecl {
                name: sname,
                span: sspan,
            })
        } else {
            None
        };
        let always = self.eat(TokenKind::KwAlways);
        let formula = self.parse_expr()?;
        let end = self.expect(TokenKind::RBrace)?.span;
        Ok(StaticPropDecl {
            name,
            name_span,
            spec,
            always,
            formula,
            span: start.merge(end),
        })
    }

    fn parse_func(&mut self) -> ParseResult<FuncDecl> {
        let start = self.advance().span; // `func`
        let (name, name_span) = self.expect_ident()?;
        self.expect(TokenKind::ColonColon)?;
        let mut sig = Vec::new();
        sig.push(self.parse_type()?);
        self.expect(TokenKind::Arrow)?;
        sig.push(self.parse_type()?);
        while self.eat(TokenKind::Arrow) {
            sig.push(self.parse_type()?);
        }
        self.expect(TokenKind::LBrace)?;
        let body = self.parse_func_body()?;
        let end = self.expect(TokenKind::RBrace)?.span;
        Ok(FuncDecl {
            name,
            name_span,
            sig,
            body,
            span: start.merge(end),
        })
    }

    /// Local bindings `name: expr;` then a result expression. A state write
    /// `@.x: e;` parses here too so the checker can reject it as impure.
    fn parse_func_body(&mut self) -> ParseResult<FuncBody> {
        let mut lets = Vec::new();
        let mut state_writes = Vec::new();
        loop {
            match self.peek_kind() {
                TokenKind::At => {
                    let save = self.pos;
                    match self.parse_assign() {
                        Ok(assign) => state_writes.push(assign),
                        Err(_) => {
                            // not an assignment; it is the result expression
                            self.pos = save;
                            break;
                        }
                    }
                }
                TokenKind::Ident
                    if self.peek_ahead(1) == TokenKind::Colon =>
                {
                    let (name, nspan) = self.expect_ident()?;
                    self.advance(); // `:`
                    let value = self.parse_expr()?;
                    self.eat(TokenKind::Semi);
                    let span = nspan.merge(value.span());
                    lets.push(LetBinding { name, value, span });
                }
                _ => break,
            }
        }
        let value = self.parse_expr()?;
        Ok(FuncBody {
            lets,
            state_writes,
            value,
        })
    }

    // ---- types ----

    fn parse_type(&mut self) -> ParseResult<TypeAst> {
        match self.peek_kind() {
            TokenKind::TyInt => Ok(TypeAst::Int(self.advance().span)),
            TokenKind::TyBool => Ok(TypeAst::Bool(self.advance().span)),
            TokenKind::TyString => Ok(TypeAst::Str(self.advance().span)),
            TokenKind::LBracket => {
                let start = self.advance().span;
                let inner = self.parse_type()?;
                let end = self.expect(TokenKind::RBracket)?.span;
                Ok(TypeAst::List(Box::new(inner), start.merge(end)))
            }
            TokenKind::Ident => {
                let (name, span) = self.expect_ident()?;
                Ok(TypeAst::Named(name, span))
            }
            _ => self.error(&["type"]),
        }
    }

    // ---- spec expressions ----

    fn parse_spec_expr(&mut self) -> ParseResult<SpecExpr> {
        let mut lhs = self.parse_spec_choice()?;
        while self.eat(TokenKind::PipePipe) {
            let rhs = self.parse_spec_choice()?;
            let span = lhs.span().merge(rhs.span());
            lhs = SpecExpr::Par(Box::new(lhs), Box::new(rhs), span);
        }
        Ok(lhs)
    }

    fn parse_spec_choice(&mut self) -> ParseResult<SpecExpr> {
        let mut lhs = self.parse_spec_seq()?;
        while self.eat(TokenKind::Pipe) {
            let rhs = self.parse_spec_seq()?;
            let span = lhs.span().merge(rhs.span());
            lhs = SpecExpr::Choice(Box::new(lhs), Box::new(rhs), span);
        }
        Ok(lhs)
    }

    fn parse_spec_seq(&mut self) -> ParseResult<SpecExpr> {
        let mut lhs = self.parse_spec_unary()?;
        while self.eat(TokenKind::Dot) {
            let rhs = self.parse_spec_unary()?;
            let span = lhs.span().merge(rhs.span());
            lhs = SpecExpr::Seq(Box::new(lhs), Box::new(rhs), span);
        }
        Ok(lhs)
    }

    fn parse_spec_unary(&mut self) -> ParseResult<SpecExpr> {
        if self.peek_kind() == TokenKind::KwAlways {
            let start = self.advance().span;
            let body = self.parse_spec_unary()?;
            let span = start.merge(body.span());
            return Ok(SpecExpr::Always(Box::new(body), span));
        }
        self.parse_spec_atom()
    }

    fn parse_spec_atom(&mut self) -> ParseResult<SpecExpr> {
        match self.peek_kind() {
            TokenKind::LParen => {
                let start = self.advance().span;
                let inner = self.parse_spec_expr()?;
                let end = self.expect(TokenKind::RParen)?.span;
                Ok(widen_spec_span(inner, start.merge(end)))
            }
            TokenKind::Ident if self.peek().lexeme == "fold" => {
                let start = self.advance().span;
                self.expect(TokenKind::LParen)?;
                self.expect(TokenKind::PipePipe)?;
                self.expect(TokenKind::Comma)?;
                let (coll, _) = self.expect_ident()?;
                let end = self.expect(TokenKind::RParen)?.span;
                Ok(SpecExpr::FoldPar(coll, start.merge(end)))
            }
            TokenKind::Ident => {
                let (name, span) = self.expect_ident()?;
                Ok(SpecExpr::Atom(name, span))
            }
            _ => self.error(&["action or spec name", "`(`", "`always`"]),
        }
    }

    // ---- value expressions ----

    pub(crate) fn parse_expr(&mut self) -> ParseResult<Expr> {
        self.parse_implies()
    }

    fn parse_implies(&mut self) -> ParseResult<Expr> {
        let lhs = self.parse_or()?;
        if self.eat(TokenKind::Implies) {
            let rhs = self.parse_implies()?;
            let span = lhs.span().merge(rhs.span());
            return Ok(Expr::Binary(
                BinOp::Implies,
                Box::new(lhs),
                Box::new(rhs),
                span,
            ));
        }
        Ok(lhs)
    }

    fn parse_or(&mut self) -> ParseResult<Expr> {
        let mut lhs = self.parse_and()?;
        while self.eat(TokenKind::Pipe) {
            let rhs = self.parse_and()?;
            let span = lhs.span().merge(rhs.span());
            lhs = Expr::Binary(BinOp::Or, Box::new(lhs), Box::new(rhs), span);
        }
        Ok(lhs)
    }

    fn parse_and(&mut self) -> ParseResult<Expr> {
        let mut lhs = self.parse_not()?;
        while self.eat(TokenKind::Amp) {
            let rhs = self.parse_not()?;
            let span = lhs.span().merge(rhs.span());
            lhs = Expr::Binary(BinOp::And, Box::new(lhs), Box::new(rhs), span);
        }
        Ok(lhs)
    }

    fn parse_not(&mut self) -> ParseResult<Expr> {
        if self.peek_kind() == TokenKind::Bang {
            let start = self.advance().span;
            let operand = self.parse_not()?;
            let span = start.merge(operand.span());
            return Ok(Expr::Not(Box::new(operand), span));
        }
        self.parse_comparison()
    }

    fn parse_comparison(&mut self) -> ParseResult<Expr> {
        let lhs = self.parse_additive()?;
        let op = match self.peek_kind() {
            TokenKind::Eq => BinOp::Eq,
            TokenKind::Neq => BinOp::Neq,
            _ => return Ok(lhs),
        };
        self.advance();
        let rhs = self.parse_additive()?;
        let span = lhs.span().merge(rhs.span());
        Ok(Expr::Binary(op, Box::new(lhs), Box::new(rhs), span))
    }

    fn parse_additive(&mut self) -> ParseResult<Expr> {
        let mut lhs = self.parse_multiplicative()?;
        loop {
            let op = match self.peek_kind() {
                TokenKind::Plus => BinOp::Add,
                TokenKind::Minus => BinOp::Sub,
                _ => break,
            };
            self.advance();
            let rhs = self.parse_multiplicative()?;
            let span = lhs.span().merge(rhs.span());
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs), span);
        }
        Ok(lhs)
    }

    fn parse_multiplicative(&mut self) -> ParseResult<Expr> {
        let mut lhs = self.parse_cast()?;
        loop {
            let op = match self.peek_kind() {
                TokenKind::Star => BinOp::Mul,
                TokenKind::Slash => BinOp::Div,
                TokenKind::Mod => BinOp::Mod,
                _ => break,
            };
            self.advance();
            let rhs = self.parse_cast()?;
            let span = lhs.span().merge(rhs.span());
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs), span);
        }
        Ok(lhs)
    }

    fn parse_cast(&mut self) -> ParseResult<Expr> {
        // `(type) expr` — the parenthesized token must be a type to be a cast
        if self.peek_kind() == TokenKind::LParen
            && matches!(
                self.peek_ahead(1),
                TokenKind::TyInt | TokenKind::TyBool | TokenKind::TyString | TokenKind::LBracket
            )
        {
            let start = self.advance().span;
            let ty = self.parse_type()?;
            self.expect(TokenKind::RParen)?;
            let operand = self.parse_cast()?;
            let span = start.merge(operand.span());
            return Ok(Expr::Cast(ty, Box::new(operand), span));
        }
        self.parse_postfix()
    }

    fn parse_postfix(&mut self) -> ParseResult<Expr> {
        let mut expr = self.parse_primary()?;
        loop {
            match self.peek_kind() {
                TokenKind::Dot => {
                    self.advance();
                    let (field, fspan) = self.expect_ident()?;
                    let span = expr.span().merge(fspan);
                    expr = Expr::Field(Box::new(expr), field, span);
                }
                TokenKind::LBracket => {
                    self.advance();
                    let index = self.parse_expr()?;
                    let end = self.expect(TokenKind::RBracket)?.span;
                    let span = expr.span().merge(end);
                    expr = Expr::Index(Box::new(expr), Box::new(index), span);
                }
                _ => break,
            }
        }
        Ok(expr)
    }

    fn parse_primary(&mut self) -> ParseResult<Expr> {
        match self.peek_kind() {
            TokenKind::IntLit => {
                let tok = self.advance();
                let value: i64 = tok.lexeme.parse().map_err(|_| ParseError {
                    expected: Vec::new(),
                    found: format!("integer literal `{}` out of range", tok.lexeme),
                    span: tok.span,
                })?;
                Ok(Expr::Int(value, tok.span))
            }
            TokenKind::StrLit => {
                let tok = self.advance();
                let text = tok.lexeme[1..tok.lexeme.len() - 1].to_string();
                Ok(Expr::Str(text, tok.span))
            }
            TokenKind::KwTrue => Ok(Expr::Bool(true, self.advance().span)),
            TokenKind::KwFalse => Ok(Expr::Bool(false, self.advance().span)),
            TokenKind::KwNull => Ok(Expr::Null(self.advance().span)),
            TokenKind::At => Ok(Expr::AtRef(self.advance().span)),
            TokenKind::LParen => {
                let start = self.advance().span;
                let inner = self.parse_expr()?;
                let end = self.expect(TokenKind::RParen)?.span;
                Ok(widen_expr_span(inner, start.merge(end)))
            }
            TokenKind::LBrace => self.parse_record_literal(),
            TokenKind::KwIf => self.parse_if(),
            TokenKind::Ident if self.peek().lexeme == "fold"
                && self.peek_ahead(1) == TokenKind::LParen =>
            {
                let start = self.advance().span;
                self.advance(); // `(`
                let op = match self.peek_kind() {
                    TokenKind::Amp => FoldOp::All,
                    TokenKind::Pipe => FoldOp::Any,
                    _ => return self.error(&["`&`", "`|`"]),
                };
                self.advance();
                self.expect(TokenKind::Comma)?;
                let arg = self.parse_expr()?;
                let end = self.expect(TokenKind::RParen)?.span;
                Ok(Expr::Fold(op, Box::new(arg), start.merge(end)))
            }
            TokenKind::Ident => {
                let (name, span) = self.expect_ident()?;
                match self.peek_kind() {
                    TokenKind::LParen => {
                        self.advance();
                        let mut args = Vec::new();
                        if self.peek_kind() != TokenKind::RParen {
                            loop {
                                args.push(self.parse_expr()?);
                                if !self.eat(TokenKind::Comma) {
                                    break;
                                }
                            }
                        }
                        let end = self.expect(TokenKind::RParen)?.span;
                        Ok(Expr::Call(name, span, args, span.merge(end)))
                    }
                    TokenKind::ColonColon => {
                        self.advance();
                        let (system, sspan) = self.expect_ident()?;
                        Ok(Expr::Template(name, system, span.merge(sspan)))
                    }
                    _ => Ok(Expr::Name(name, span)),
                }
            }
            _ => self.error(&["expression"]),
        }
    }

    fn parse_record_literal(&mut self) -> ParseResult<Expr> {
        let start = self.advance().span; // `{`
        let mut fields = Vec::new();
        while self.peek_kind() != TokenKind::RBrace {
            let (name, _) = self.expect_ident()?;
            self.expect(TokenKind::Colon)?;
            let value = self.parse_expr()?;
            fields.push((name, value));
            if !self.eat(TokenKind::Comma) && !self.eat(TokenKind::Semi) {
                break;
            }
        }
        let end = self.expect(TokenKind::RBrace)?.span;
        Ok(Expr::Record(fields, start.merge(end)))
    }

    fn parse_if(&mut self) -> ParseResult<Expr> {
        let start = self.advance().span; // `if`
        let cond = self.parse_expr()?;
        self.expect(TokenKind::LBrace)?;
        let then_val = self.parse_expr()?;
        self.expect(TokenKind::RBrace)?;
        self.expect(TokenKind::KwElse)?;
        self.expect(TokenKind::LBrace)?;
        let else_val = self.parse_expr()?;
        let end = self.expect(TokenKind::RBrace)?.span;
        Ok(Expr::If(
            Box::new(cond),
            Box::new(then_val),
            Box::new(else_val),
            start.merge(end),
        ))
    }
}

fn widen_expr_span(expr: Expr, span: Span) -> Expr {
    match expr {
        Expr::Int(v, _) => Expr::Int(v, span),
        Expr::Str(v, _) => Expr::Str(v, span),
        Expr::Bool(v, _) => Expr::Bool(v, span),
        Expr::Null(_) => Expr::Null(span),
        Expr::AtRef(_) => Expr::AtRef(span),
        Expr::Name(n, _) => Expr::Name(n, span),
        Expr::Field(e, f, _) => Expr::Field(e, f, span),
        Expr::Index(a, b, _) => Expr::Index(a, b, span),
        Expr::Call(n, ns, a, _) => Expr::Call(n, ns, a, span),
        Expr::Record(f, _) => Expr::Record(f, span),
        Expr::Not(e, _) => Expr::Not(e, span),
        Expr::Binary(op, a, b, _) => Expr::Binary(op, a, b, span),
        Expr::Cast(t, e, _) => Expr::Cast(t, e, span),
        Expr::If(c, t, e, _) => Expr::If(c, t, e, span),
        Expr::Fold(op, e, _) => Expr::Fold(op, e, span),
        Expr::Template(a, b, _) => Expr::Template(a, b, span),
    }
}

fn widen_spec_span(expr: SpecExpr, span: Span) -> SpecExpr {
    match expr {
        SpecExpr::Atom(n, _) => SpecExpr::Atom(n, span),
        SpecExpr::Seq(a, b, _) => SpecExpr::Seq(a, b, span),
        SpecExpr::Choice(a, b, _) => SpecExpr::Choice(a, b, span),
        SpecExpr::Always(e, _) => SpecExpr::Always(e, span),
        SpecExpr::Par(a, b, _) => SpecExpr::Par(a, b, span),
        SpecExpr::FoldPar(n, _) => SpecExpr::FoldPar(n, span),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexer::tokenize;

    fn parse_src(src: &str) -> ProgramAst {
        parse(tokenize(src).unwrap()).unwrap()
    }

    fn parse_spec_body(body: &str) -> SpecExpr {
        let src = format!("system T {{ spec Main {{ {} }} }}", body);
        let prog = parse_src(&src);
        prog.systems[0].specs[0].body.clone()
    }

    #[test]
    fn minimal_system() {
        let prog = parse_src("system X {}");
        assert_eq!(prog.systems.len(), 1);
        let sys = &prog.systems[0];
        assert_eq!(sys.name, "X");
        assert!(sys.records.is_empty());
        assert!(sys.state_vars.is_empty());
        assert!(sys.actions.is_empty());
        assert!(sys.specs.is_empty());
        assert!(sys.funcs.is_empty());
        assert!(sys.init.is_none());
    }

    #[test]
    fn sequencing_binds_tighter_than_choice() {
        let e = parse_spec_body("A.B | C.D");
        match e {
            SpecExpr::Choice(l, r, _) => {
                assert!(matches!(*l, SpecExpr::Seq(..)));
                assert!(matches!(*r, SpecExpr::Seq(..)));
            }
            other => panic!("expected choice of sequences, got {:?}", other),
        }
    }

    #[test]
    fn choice_binds_tighter_than_parallel() {
        let e = parse_spec_body("A | B || C");
        assert!(matches!(e, SpecExpr::Par(..)));
    }

    #[test]
    fn always_is_tightest() {
        let e = parse_spec_body("always A.B");
        match e {
            SpecExpr::Seq(l, _, _) => assert!(matches!(*l, SpecExpr::Always(..))),
            other => panic!("expected seq with always lhs, got {:?}", other),
        }
    }

    #[test]
    fn duplicate_import_rejected() {
        let toks = tokenize("import A;\nimport A;").unwrap();
        let err = parse(toks).unwrap_err();
        assert!(err.found.contains("duplicate import"));
        assert_eq!(err.span.line, 2);
    }

    #[test]
    fn duplicate_init_rejected() {
        let toks =
            tokenize("system X { init([string] a) { } init([string] a) { } }").unwrap();
        assert!(parse(toks).is_err());
    }

    #[test]
    fn comparison_binds_tighter_than_not() {
        let src = "system T { prop P { !@.a = @.b } }";
        let prog = parse_src(src);
        let body = &prog.systems[0].props[0].body;
        match body {
            Expr::Not(inner, _) => assert!(matches!(**inner, Expr::Binary(BinOp::Eq, ..))),
            other => panic!("expected negated comparison, got {:?}", other),
        }
    }

    #[test]
    fn property_with_spec_prefix() {
        let src = "system T { static property P { Main => always !(Bad) } }";
        let prog = parse_src(src);
        let p = &prog.systems[0].static_props[0];
        assert_eq!(p.spec.as_ref().unwrap().name, "Main");
        assert!(p.always);
        assert!(matches!(p.formula, Expr::Not(..)));
    }

    #[test]
    fn parsing_is_deterministic() {
        let src = "system X { state int a; action A { @.a: a + 1; } spec Main { always A } }";
        assert_eq!(parse_src(src), parse_src(src));
    }

    #[test]
    fn expression_spans_reparse() {
        let src = r#"system T { prop P { @.h.leftHand /= null & @.h.rightHand = null } }"#;
        let prog = parse_src(src);
        let body = prog.systems[0].props[0].body.clone();
        let span = body.span();
        let slice = &src[span.lo..span.hi];

        let reparsed_prog =
            parse_src(&format!("system T {{ prop P {{ {} }} }}", slice));
        let mut reparsed = reparsed_prog.systems[0].props[0].body.clone();
        let mut original = body;
        original.strip_spans();
        reparsed.strip_spans();
        assert_eq!(original, reparsed);
    }

    #[test]
    fn record_literal_with_semicolons() {
        let src = "system T { action R { @.h: { leftHand: null; rightHand: null; } @.t: true; } }";
        let prog = parse_src(src);
        let action = &prog.systems[0].actions[0];
        assert_eq!(action.body.len(), 2);
        assert!(matches!(action.body[0].value, Expr::Record(..)));
    }

    #[test]
    fn cast_and_index() {
        let src = "system T { init([string] args) { @.id: (int) args[0]; } }";
        let prog = parse_src(src);
        let init = prog.systems[0].init.as_ref().unwrap();
        match &init.body[0].value {
            Expr::Cast(TypeAst::Int(_), inner, _) => {
                assert!(matches!(**inner, Expr::Index(..)))
            }
            other => panic!("expected cast of index, got {:?}", other),
        }
    }

    #[test]
    fn template_and_fold() {
        let src = "system T { init([string] a) { phils: replicate(3, p::Philosopher); } \
                   spec Main { fold(||, phils) } prop P { fold(&, phils.Waiting) } }";
        let prog = parse_src(src);
        let init = prog.systems[0].init.as_ref().unwrap();
        match &init.body[0].value {
            Expr::Call(name, _, args, _) => {
                assert_eq!(name, "replicate");
                assert!(matches!(args[1], Expr::Template(..)));
            }
            other => panic!("expected call, got {:?}", other),
        }
        assert!(matches!(
            prog.systems[0].specs[0].body,
            SpecExpr::FoldPar(..)
        ));
        assert!(matches!(prog.systems[0].props[0].body, Expr::Fold(FoldOp::All, ..)));
    }

    #[test]
    fn error_carries_location_and_expectation() {
        let toks = tokenize("system X { state int ; }").unwrap();
        let err = parse(toks).unwrap_err();
        assert_eq!(err.span.line, 1);
        assert_eq!(err.span.col, 22);
        assert!(err.message().contains("identifier"));
    }
}
