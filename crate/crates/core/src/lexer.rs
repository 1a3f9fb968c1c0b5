//! Tokenizer for the modeling language.
//!
//! Comments are `--` to end of line and `{- ... -}` blocks, which nest.
//! String literals may span lines and support `\"`, `\\` and `\n` escapes.

use crate::ast::SourceSpan;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    // keywords
    Type,
    Define,
    InitCond,
    Agent,
    Transitions,
    Fairness,
    SpecObs,
    Protocol,
    Begin,
    End,
    If,
    Fi,
    Do,
    Od,
    Skip,
    Otherwise,
    Neg,
    True,
    False,
    // punctuation and operators
    Assign,      // :=
    Colon,       // :
    Eq,          // =   (declaration binding)
    EqEq,        // ==
    Ne,          // /=
    Le,          // <=
    Ge,          // >=
    Lt,          // <
    Gt,          // >
    Plus,        // +
    Minus,       // -
    AndOp,       // /\
    OrOp,        // \/
    Implies,     // =>
    Arrow,       // ->
    LParen,      // (
    RParen,      // )
    LBrace,      // {
    RBrace,      // }
    LBrackBrack, // [[
    RBrackBrack, // ]]
    Box,         // []
    Bar,         // |
    Comma,       // ,
    Semi,        // ;
    Dot,         // .
    DotDot,      // ..
    Prime,       // '
    LAngleAngle, // <<
    RAngleAngle, // >>
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Int(n) => write!(f, "integer `{n}`"),
            Tok::Str(_) => write!(f, "string literal"),
            Tok::Type => write!(f, "`type`"),
            Tok::Define => write!(f, "`define`"),
            Tok::InitCond => write!(f, "`init_cond`"),
            Tok::Agent => write!(f, "`agent`"),
            Tok::Transitions => write!(f, "`transitions`"),
            Tok::Fairness => write!(f, "`fairness`"),
            Tok::SpecObs => write!(f, "`spec_obs`"),
            Tok::Protocol => write!(f, "`protocol`"),
            Tok::Begin => write!(f, "`begin`"),
            Tok::End => write!(f, "`end`"),
            Tok::If => write!(f, "`if`"),
            Tok::Fi => write!(f, "`fi`"),
            Tok::Do => write!(f, "`do`"),
            Tok::Od => write!(f, "`od`"),
            Tok::Skip => write!(f, "`skip`"),
            Tok::Otherwise => write!(f, "`otherwise`"),
            Tok::Neg => write!(f, "`neg`"),
            Tok::True => write!(f, "`True`"),
            Tok::False => write!(f, "`False`"),
            Tok::Assign => write!(f, "`:=`"),
            Tok::Colon => write!(f, "`:`"),
            Tok::Eq => write!(f, "`=`"),
            Tok::EqEq => write!(f, "`==`"),
            Tok::Ne => write!(f, "`/=`"),
            Tok::Le => write!(f, "`<=`"),
            Tok::Ge => write!(f, "`>=`"),
            Tok::Lt => write!(f, "`<`"),
            Tok::Gt => write!(f, "`>`"),
            Tok::Plus => write!(f, "`+`"),
            Tok::Minus => write!(f, "`-`"),
            Tok::AndOp => write!(f, "`/\\`"),
            Tok::OrOp => write!(f, "`\\/`"),
            Tok::Implies => write!(f, "`=>`"),
            Tok::Arrow => write!(f, "`->`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::LBrace => write!(f, "`{{`"),
            Tok::RBrace => write!(f, "`}}`"),
            Tok::LBrackBrack => write!(f, "`[[`"),
            Tok::RBrackBrack => write!(f, "`]]`"),
            Tok::Box => write!(f, "`[]`"),
            Tok::Bar => write!(f, "`|`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Semi => write!(f, "`;`"),
            Tok::Dot => write!(f, "`.`"),
            Tok::DotDot => write!(f, "`..`"),
            Tok::Prime => write!(f, "`'`"),
            Tok::LAngleAngle => write!(f, "`<<`"),
            Tok::RAngleAngle => write!(f, "`>>`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub span: SourceSpan,
    pub message: String,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: u32,
    col: u32,
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, LexError> {
    let mut lx = Lexer {
        src: text.as_bytes(),
        pos: 0,
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    loop {
        lx.skip_trivia()?;
        let span = lx.span_here(1);
        let Some(c) = lx.peek() else {
            out.push(Token {
                tok: Tok::Eof,
                span,
            });
            return Ok(out);
        };
        let tok = match c {
            b'"' => lx.string()?,
            b'0'..=b'9' => lx.int()?,
            b'_' | b'a'..=b'z' | b'A'..=b'Z' => lx.ident_or_keyword(),
            _ => lx.symbol()?,
        };
        let len = lx.col.saturating_sub(span.column).max(1);
        out.push(Token {
            tok,
            span: SourceSpan::new(span.line, span.column, len),
        });
    }
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek2(&self) -> Option<u8> {
        self.src.get(self.pos + 1).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn span_here(&self, len: u32) -> SourceSpan {
        SourceSpan::new(self.line, self.col, len)
    }

    fn skip_trivia(&mut self) -> Result<(), LexError> {
        loop {
            match (self.peek(), self.peek2()) {
                (Some(c), _) if c.is_ascii_whitespace() => {
                    self.bump();
                }
                (Some(b'-'), Some(b'-')) => {
                    while let Some(c) = self.peek() {
                        if c == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                (Some(b'{'), Some(b'-')) => {
                    let open = self.span_here(2);
                    self.bump();
                    self.bump();
                    let mut depth = 1usize;
                    loop {
                        match (self.peek(), self.peek2()) {
                            (Some(b'{'), Some(b'-')) => {
                                self.bump();
                                self.bump();
                                depth += 1;
                            }
                            (Some(b'-'), Some(b'}')) => {
                                self.bump();
                                self.bump();
                                depth -= 1;
                                if depth == 0 {
                                    break;
                                }
                            }
                            (Some(_), _) => {
                                self.bump();
                            }
                            (None, _) => {
                                return Err(LexError {
                                    span: open,
                                    message: "unterminated block comment".into(),
                                })
                            }
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn string(&mut self) -> Result<Tok, LexError> {
        let open = self.span_here(1);
        self.bump(); // opening quote
        let mut s = String::new();
        loop {
            match self.bump() {
                Some(b'"') => return Ok(Tok::Str(s)),
                Some(b'\\') => match self.bump() {
                    Some(b'"') => s.push('"'),
                    Some(b'\\') => s.push('\\'),
                    Some(b'n') => s.push('\n'),
                    other => {
                        return Err(LexError {
                            span: self.span_here(1),
                            message: match other {
                                Some(c) => format!("unknown escape `\\{}`", c as char),
                                None => "unterminated string literal".into(),
                            },
                        })
                    }
                },
                Some(c) => {
                    // Strings may span lines; pass raw bytes through.
                    if c < 0x80 {
                        s.push(c as char);
                    } else {
                        // Re-assemble the UTF-8 sequence byte by byte.
                        let mut buf = vec![c];
                        while let Some(n) = self.peek() {
                            if n & 0xC0 == 0x80 {
                                buf.push(n);
                                self.bump();
                            } else {
                                break;
                            }
                        }
                        match std::str::from_utf8(&buf) {
                            Ok(t) => s.push_str(t),
                            Err(_) => {
                                return Err(LexError {
                                    span: self.span_here(1),
                                    message: "invalid UTF-8 in string literal".into(),
                                })
                            }
                        }
                    }
                }
                None => {
                    return Err(LexError {
                        span: open,
                        message: "unterminated string literal".into(),
                    })
                }
            }
        }
    }

    fn int(&mut self) -> Result<Tok, LexError> {
        let start = self.span_here(1);
        let mut n: i64 = 0;
        let mut overflow = false;
        while let Some(c) = self.peek() {
            if !c.is_ascii_digit() {
                break;
            }
            let (m, o1) = n.overflowing_mul(10);
            let (m, o2) = m.overflowing_add((c - b'0') as i64);
            overflow |= o1 || o2;
            n = m;
            self.bump();
        }
        if overflow {
            return Err(LexError {
                span: start,
                message: "integer literal out of range".into(),
            });
        }
        Ok(Tok::Int(n))
    }

    fn ident_or_keyword(&mut self) -> Tok {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c == b'_' || c.is_ascii_alphanumeric() {
                self.bump();
            } else {
                break;
            }
        }
        let word = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        match word {
            "type" => Tok::Type,
            "define" => Tok::Define,
            "init_cond" => Tok::InitCond,
            "agent" => Tok::Agent,
            "transitions" => Tok::Transitions,
            "fairness" => Tok::Fairness,
            "spec_obs" => Tok::SpecObs,
            "protocol" => Tok::Protocol,
            "begin" => Tok::Begin,
            "end" => Tok::End,
            "if" => Tok::If,
            "fi" => Tok::Fi,
            "do" => Tok::Do,
            "od" => Tok::Od,
            "skip" => Tok::Skip,
            "otherwise" => Tok::Otherwise,
            "neg" => Tok::Neg,
            "True" => Tok::True,
            "False" => Tok::False,
            _ => Tok::Ident(word.to_string()),
        }
    }

    fn symbol(&mut self) -> Result<Tok, LexError> {
        let span = self.span_here(1);
        let c = self.bump().unwrap();
        let two = |lx: &mut Self, t: Tok| {
            lx.bump();
            Ok(t)
        };
        match (c, self.peek()) {
            (b':', Some(b'=')) => two(self, Tok::Assign),
            (b':', _) => Ok(Tok::Colon),
            (b'=', Some(b'=')) => two(self, Tok::EqEq),
            (b'=', Some(b'>')) => two(self, Tok::Implies),
            (b'=', _) => Ok(Tok::Eq),
            (b'/', Some(b'=')) => two(self, Tok::Ne),
            (b'/', Some(b'\\')) => two(self, Tok::AndOp),
            (b'\\', Some(b'/')) => two(self, Tok::OrOp),
            (b'<', Some(b'=')) => two(self, Tok::Le),
            (b'<', Some(b'<')) => two(self, Tok::LAngleAngle),
            (b'<', _) => Ok(Tok::Lt),
            (b'>', Some(b'=')) => two(self, Tok::Ge),
            (b'>', Some(b'>')) => two(self, Tok::RAngleAngle),
            (b'>', _) => Ok(Tok::Gt),
            (b'+', _) => Ok(Tok::Plus),
            (b'-', Some(b'>')) => two(self, Tok::Arrow),
            (b'-', _) => Ok(Tok::Minus),
            (b'(', _) => Ok(Tok::LParen),
            (b')', _) => Ok(Tok::RParen),
            (b'{', _) => Ok(Tok::LBrace),
            (b'}', _) => Ok(Tok::RBrace),
            (b'[', Some(b'[')) => two(self, Tok::LBrackBrack),
            (b'[', Some(b']')) => two(self, Tok::Box),
            (b']', Some(b']')) => two(self, Tok::RBrackBrack),
            (b'|', _) => Ok(Tok::Bar),
            (b',', _) => Ok(Tok::Comma),
            (b';', _) => Ok(Tok::Semi),
            (b'.', Some(b'.')) => two(self, Tok::DotDot),
            (b'.', _) => Ok(Tok::Dot),
            (b'\'', _) => Ok(Tok::Prime),
            _ => Err(LexError {
                span,
                message: format!("unexpected character `{}`", escape_byte(c)),
            }),
        }
    }
}

fn escape_byte(c: u8) -> String {
    if c.is_ascii_graphic() || c == b' ' {
        (c as char).to_string()
    } else {
        format!("\\x{c:02x}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn lexes_operators() {
        assert_eq!(
            toks("a == b /\\ neg c \\/ d => e /= f"),
            vec![
                Tok::Ident("a".into()),
                Tok::EqEq,
                Tok::Ident("b".into()),
                Tok::AndOp,
                Tok::Neg,
                Tok::Ident("c".into()),
                Tok::OrOp,
                Tok::Ident("d".into()),
                Tok::Implies,
                Tok::Ident("e".into()),
                Tok::Ne,
                Tok::Ident("f".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn lexes_brackets_and_actions() {
        assert_eq!(
            toks("[[ x | True ]] [] -> <<Deposit>>"),
            vec![
                Tok::LBrackBrack,
                Tok::Ident("x".into()),
                Tok::Bar,
                Tok::True,
                Tok::RBrackBrack,
                Tok::Box,
                Tok::Arrow,
                Tok::LAngleAngle,
                Tok::Ident("Deposit".into()),
                Tok::RAngleAngle,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn nested_block_comments_and_line_comments() {
        assert_eq!(
            toks("a {- outer {- inner -} still comment -} b -- rest\nc"),
            vec![
                Tok::Ident("a".into()),
                Tok::Ident("b".into()),
                Tok::Ident("c".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn multiline_string() {
        assert_eq!(toks("\"a\nb\""), vec![Tok::Str("a\nb".into()), Tok::Eof]);
    }

    #[test]
    fn primed_and_ranges() {
        assert_eq!(
            toks("x' {0..20}"),
            vec![
                Tok::Ident("x".into()),
                Tok::Prime,
                Tok::LBrace,
                Tok::Int(0),
                Tok::DotDot,
                Tok::Int(20),
                Tok::RBrace,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn unterminated_comment_is_error() {
        assert!(tokenize("a {- b").is_err());
        assert!(tokenize("\"abc").is_err());
    }

    #[test]
    fn spans_track_lines() {
        let ts = tokenize("a\n  bb").unwrap();
        assert_eq!(ts[0].span, SourceSpan::new(1, 1, 1));
        assert_eq!(ts[1].span, SourceSpan::new(2, 3, 2));
    }
}
