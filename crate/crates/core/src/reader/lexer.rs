use super::SyntaxError;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Name(String),
    /// Quoted atom; never starts a negative numeric literal.
    QName(String),
    Var(String),
    Int(i64),
    Float(f64),
    Str(String),
    /// `(` ; the flag is set when it directly follows the previous token
    /// with no layout, i.e. functional notation.
    Open(bool),
    Close,
    OpenList,
    CloseList,
    OpenCurly,
    CloseCurly,
    Comma,
    Bar,
    End,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
    pub layout_before: bool,
}

pub fn is_symbol_char(c: char) -> bool {
    "+-*/\\^<>=~:.?@#&$".contains(c)
}

pub fn is_alnum(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

pub struct Lexer {
    src: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
}

impl Lexer {
    pub fn new(src: &str) -> Self {
        Lexer { src: src.chars().collect(), pos: 0, line: 1, col: 1 }
    }

    pub fn line(&self) -> usize {
        self.line
    }

    fn peek(&self) -> Option<char> {
        self.src.get(self.pos).copied()
    }

    fn peek_at(&self, k: usize) -> Option<char> {
        self.src.get(self.pos + k).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn err(&self, msg: impl Into<String>) -> SyntaxError {
        SyntaxError { line: self.line, col: self.col, msg: msg.into() }
    }

    /// Skip whitespace and comments; reports whether anything was skipped.
    fn skip_layout(&mut self) -> Result<bool, SyntaxError> {
        let start = self.pos;
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('%') => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                }
                Some('/') if self.peek_at(1) == Some('*') => {
                    self.bump();
                    self.bump();
                    loop {
                        match self.bump() {
                            Some('*') if self.peek() == Some('/') => {
                                self.bump();
                                break;
                            }
                            Some(_) => {}
                            None => return Err(self.err("unterminated block comment")),
                        }
                    }
                }
                _ => break,
            }
        }
        Ok(self.pos != start)
    }

    /// Next token, or `None` at end of input.
    pub fn next_token(&mut self) -> Result<Option<Token>, SyntaxError> {
        let layout = self.skip_layout()?;
        let (line, col) = (self.line, self.col);
        let Some(c) = self.peek() else { return Ok(None) };
        let tok = match c {
            '(' => {
                self.bump();
                Tok::Open(!layout)
            }
            ')' => {
                self.bump();
                Tok::Close
            }
            '[' => {
                self.bump();
                Tok::OpenList
            }
            ']' => {
                self.bump();
                Tok::CloseList
            }
            '{' => {
                self.bump();
                Tok::OpenCurly
            }
            '}' => {
                self.bump();
                Tok::CloseCurly
            }
            ',' => {
                self.bump();
                Tok::Comma
            }
            '|' if self.peek_at(1) == Some('|') => {
                self.bump();
                self.bump();
                Tok::Name("||".into())
            }
            '|' => {
                self.bump();
                Tok::Bar
            }
            '!' | ';' => {
                self.bump();
                Tok::Name(c.to_string())
            }
            '\'' => {
                self.bump();
                Tok::QName(self.quoted('\'')?)
            }
            '"' => {
                self.bump();
                Tok::Str(self.quoted('"')?)
            }
            '`' => {
                self.bump();
                Tok::Str(self.quoted('`')?)
            }
            '0'..='9' => self.number()?,
            '_' | 'A'..='Z' => Tok::Var(self.word()),
            'a'..='z' => Tok::Name(self.word()),
            '.' if matches!(self.peek_at(1), None | Some('%')) || self.peek_at(1).is_some_and(|c| c.is_whitespace()) => {
                self.bump();
                Tok::End
            }
            c if is_symbol_char(c) => {
                let mut s = String::new();
                while let Some(c) = self.peek().filter(|&c| is_symbol_char(c)) {
                    s.push(c);
                    self.bump();
                }
                Tok::Name(s)
            }
            c => {
                self.bump();
                return Err(self.err(format!("unexpected character {c:?}")));
            }
        };
        Ok(Some(Token { tok, line, col, layout_before: layout }))
    }

    fn word(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek().filter(|&c| is_alnum(c)) {
            s.push(c);
            self.bump();
        }
        s
    }

    fn escape(&mut self) -> Result<Option<char>, SyntaxError> {
        let c = self.bump().ok_or_else(|| self.err("unterminated escape"))?;
        Ok(Some(match c {
            'n' => '\n',
            't' => '\t',
            'r' => '\r',
            'a' => '\x07',
            'b' => '\x08',
            'f' => '\x0c',
            'v' => '\x0b',
            'e' => '\x1b',
            's' => ' ',
            '0'..='7' => {
                let mut v = c.to_digit(8).unwrap();
                while let Some(d) = self.peek().and_then(|c| c.to_digit(8)) {
                    v = v * 8 + d;
                    self.bump();
                }
                if self.peek() == Some('\\') {
                    self.bump();
                }
                char::from_u32(v).ok_or_else(|| self.err("bad octal escape"))?
            }
            'x' => {
                let mut v = 0u32;
                while let Some(d) = self.peek().and_then(|c| c.to_digit(16)) {
                    v = v * 16 + d;
                    self.bump();
                }
                if self.peek() == Some('\\') {
                    self.bump();
                }
                char::from_u32(v).ok_or_else(|| self.err("bad hex escape"))?
            }
            '\n' => return Ok(None),
            '\\' | '\'' | '"' | '`' => c,
            other => return Err(self.err(format!("unknown escape \\{other}"))),
        }))
    }

    fn quoted(&mut self, q: char) -> Result<String, SyntaxError> {
        let mut s = String::new();
        loop {
            match self.bump() {
                None => return Err(self.err("unterminated quoted")),
                Some(c) if c == q => {
                    if self.peek() == Some(q) {
                        self.bump();
                        s.push(q);
                    } else {
                        return Ok(s);
                    }
                }
                Some('\\') => {
                    if let Some(c) = self.escape()? {
                        s.push(c);
                    }
                }
                Some(c) => s.push(c),
            }
        }
    }

    fn digits(&mut self, radix: u32) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if c.is_digit(radix) {
                s.push(c);
                self.bump();
            } else if c == '_' && self.peek_at(1).is_some_and(|d| d.is_digit(radix)) {
                self.bump();
            } else {
                break;
            }
        }
        s
    }

    fn number(&mut self) -> Result<Tok, SyntaxError> {
        if self.peek() == Some('0') {
            let radix = match self.peek_at(1) {
                Some('x') => Some(16),
                Some('o') => Some(8),
                Some('b') => Some(2),
                _ => None,
            };
            if let Some(radix) = radix {
                if self.peek_at(2).is_some_and(|c| c.is_digit(radix)) {
                    self.bump();
                    self.bump();
                    let ds = self.digits(radix);
                    return i64::from_str_radix(&ds, radix).map(Tok::Int).map_err(|_| self.err("integer overflow"));
                }
            }
            if self.peek_at(1) == Some('\'') {
                self.bump();
                self.bump();
                let c = match self.bump() {
                    Some('\\') => self.escape()?.ok_or_else(|| self.err("bad character code"))?,
                    Some('\'') if self.peek() == Some('\'') => {
                        self.bump();
                        '\''
                    }
                    Some(c) => c,
                    None => return Err(self.err("unterminated character code")),
                };
                return Ok(Tok::Int(c as i64));
            }
        }
        let int_part = self.digits(10);
        let is_float = self.peek() == Some('.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit());
        if is_float {
            self.bump();
            let frac = self.digits(10);
            let mut text = format!("{int_part}.{frac}");
            if matches!(self.peek(), Some('e' | 'E')) {
                let sign = self.peek_at(1);
                let ok = match sign {
                    Some('+' | '-') => self.peek_at(2).is_some_and(|c| c.is_ascii_digit()),
                    Some(c) => c.is_ascii_digit(),
                    None => false,
                };
                if ok {
                    self.bump();
                    text.push('e');
                    if matches!(sign, Some('+' | '-')) {
                        text.push(self.bump().unwrap());
                    }
                    text.push_str(&self.digits(10));
                }
            }
            return text.parse::<f64>().map(Tok::Float).map_err(|_| self.err("bad float"));
        }
        int_part.parse::<i64>().map(Tok::Int).map_err(|_| self.err("integer overflow"))
    }
}
