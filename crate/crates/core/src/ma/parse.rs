use thiserror::Error;

use super::{Arg, CodeBlock, CodeKind, Loc, LongDecl, MaInstr, MaItem, MaObject, Vis};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}: {msg}")]
pub struct MaParseError {
    pub line: usize,
    pub msg: String,
}

fn err<T>(line: usize, msg: impl Into<String>) -> Result<T, MaParseError> {
    Err(MaParseError { line, msg: msg.into() })
}

/// Strip a trailing `;` comment, respecting string literals.
fn strip_comment(s: &str) -> &str {
    let mut in_str = false;
    let mut esc = false;
    for (i, c) in s.char_indices() {
        if in_str {
            match c {
                _ if esc => esc = false,
                '\\' => esc = true,
                '"' => in_str = false,
                _ => {}
            }
        } else if c == '"' {
            in_str = true;
        } else if c == ';' {
            return &s[..i];
        }
    }
    s
}

fn paren_balance(s: &str) -> i64 {
    let mut in_str = false;
    let mut esc = false;
    let mut depth = 0;
    for c in s.chars() {
        if in_str {
            match c {
                _ if esc => esc = false,
                '\\' => esc = true,
                '"' => in_str = false,
                _ => {}
            }
        } else {
            match c {
                '"' => in_str = true,
                '(' => depth += 1,
                ')' => depth -= 1,
                _ => {}
            }
        }
    }
    depth
}

fn split_args(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut in_str = false;
    let mut esc = false;
    let mut depth = 0;
    for c in s.chars() {
        if in_str {
            cur.push(c);
            match c {
                _ if esc => esc = false,
                '\\' => esc = true,
                '"' => in_str = false,
                _ => {}
            }
            continue;
        }
        match c {
            '"' => {
                in_str = true;
                cur.push(c);
            }
            '(' => {
                depth += 1;
                cur.push(c);
            }
            ')' => {
                depth -= 1;
                cur.push(c);
            }
            ',' if depth == 0 => out.push(std::mem::take(&mut cur)),
            c => cur.push(c),
        }
    }
    if !cur.trim().is_empty() || !out.is_empty() {
        out.push(cur);
    }
    out.into_iter().map(|a| a.trim().to_string()).collect()
}

fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn unquote(s: &str, line: usize) -> Result<String, MaParseError> {
    let inner = &s[1..s.len() - 1];
    let mut out = String::new();
    let mut cs = inner.chars();
    while let Some(c) = cs.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match cs.next() {
            Some('n') => out.push('\n'),
            Some('t') => out.push('\t'),
            Some('r') => out.push('\r'),
            Some('\\') => out.push('\\'),
            Some('"') => out.push('"'),
            Some('x') => {
                let h: String = cs.by_ref().take(2).collect();
                match u32::from_str_radix(&h, 16).ok().and_then(char::from_u32) {
                    Some(c) => out.push(c),
                    None => return err(line, "bad escape"),
                }
            }
            _ => return err(line, "bad escape"),
        }
    }
    Ok(out)
}

/// `name(n)` or `name`.
fn indexed(s: &str) -> Option<(String, Option<usize>)> {
    if let Some(open) = s.find('(') {
        let name = &s[..open];
        let rest = s[open + 1..].strip_suffix(')')?;
        let n = rest.trim().parse().ok()?;
        is_ident(name).then(|| (name.to_string(), Some(n)))
    } else {
        is_ident(s).then(|| (s.to_string(), None))
    }
}

fn parse_arg(s: &str, line: usize) -> Result<Arg, MaParseError> {
    if s.len() >= 2 && s.starts_with('"') && s.ends_with('"') {
        return Ok(Arg::Str(unquote(s, line)?));
    }
    if let Ok(n) = s.parse::<i64>() {
        return Ok(Arg::Int(n));
    }
    if s.starts_with(|c: char| c.is_ascii_digit() || c == '-') {
        if let Ok(x) = s.parse::<f64>() {
            return Ok(Arg::Float(x));
        }
    }
    if let Some(rest) = s.strip_prefix('&') {
        return match indexed(rest) {
            Some((n, Some(i))) if n == "X" => Ok(Arg::XAddr(i)),
            Some((n, Some(i))) if n == "Y" => Ok(Arg::YAddr(i)),
            Some((n, None)) => Ok(Arg::Addr(n)),
            _ => err(line, format!("bad address operand {s}")),
        };
    }
    match indexed(s) {
        Some((n, Some(i))) if n == "X" => Ok(Arg::X(i)),
        Some((n, Some(i))) if n == "Y" => Ok(Arg::Y(i)),
        Some((n, i)) => Ok(Arg::Mem(n, i)),
        None => err(line, format!("bad operand {s}")),
    }
}

fn parse_loc(s: &str, line: usize) -> Result<Loc, MaParseError> {
    match parse_arg(s, line)? {
        Arg::X(i) => Ok(Loc::X(i)),
        Arg::Y(i) => Ok(Loc::Y(i)),
        Arg::Mem(n, i) => Ok(Loc::Mem(n, i)),
        _ => err(line, format!("bad location {s}")),
    }
}

fn parse_vis(s: &str, line: usize) -> Result<Vis, MaParseError> {
    match s {
        "local" => Ok(Vis::Local),
        "global" => Ok(Vis::Global),
        "initializer" => Ok(Vis::Initializer),
        _ => err(line, format!("bad visibility {s}")),
    }
}

fn parse_instr(op: &str, rest: &str, line: usize) -> Result<MaInstr, MaParseError> {
    let ident = |s: &str| -> Result<String, MaParseError> {
        if is_ident(s) {
            Ok(s.to_string())
        } else {
            err(line, format!("bad symbol {s:?}"))
        }
    };
    let none = |i: MaInstr| -> Result<MaInstr, MaParseError> {
        if rest.is_empty() {
            Ok(i)
        } else {
            err(line, format!("{op} takes no operand"))
        }
    };
    match op {
        "pl_jump" => Ok(MaInstr::PlJump(ident(rest)?)),
        "pl_call" => Ok(MaInstr::PlCall(ident(rest)?)),
        "jump" => Ok(MaInstr::Jump(ident(rest)?)),
        "pl_ret" => none(MaInstr::PlRet),
        "pl_fail" => none(MaInstr::PlFail),
        "fail_ret" => none(MaInstr::FailRet),
        "jump_ret" => none(MaInstr::JumpRet),
        "c_ret" => none(MaInstr::CRet),
        "move_ret" => Ok(MaInstr::MoveRet(parse_loc(rest, line)?)),
        "move" => {
            let a = split_args(rest);
            if a.len() != 2 {
                return err(line, "move takes two operands");
            }
            Ok(MaInstr::Move(parse_loc(&a[0], line)?, parse_loc(&a[1], line)?))
        }
        "call_c" => {
            let open = rest.find('(').ok_or(MaParseError { line, msg: "call_c without arguments".into() })?;
            let name = ident(rest[..open].trim())?;
            let inner = rest[open + 1..]
                .trim_end()
                .strip_suffix(')')
                .ok_or(MaParseError { line, msg: "unterminated call_c".into() })?;
            let args = split_args(inner).iter().map(|a| parse_arg(a, line)).collect::<Result<_, _>>()?;
            Ok(MaInstr::CallC(name, args))
        }
        _ => err(line, format!("unknown instruction {op}")),
    }
}

pub fn parse_ma(text: &str) -> Result<MaObject, MaParseError> {
    let mut obj = MaObject::default();
    let mut cur: Option<CodeBlock> = None;
    let mut initializers = 0;
    let lines: Vec<&str> = text.lines().collect();
    let mut k = 0;
    while k < lines.len() {
        let line_no = k + 1;
        let mut stmt = strip_comment(lines[k]).to_string();
        k += 1;
        while paren_balance(&stmt) > 0 && k < lines.len() {
            stmt.push(' ');
            stmt.push_str(strip_comment(lines[k]).trim());
            k += 1;
        }
        let stmt = stmt.trim();
        if stmt.is_empty() {
            continue;
        }
        let (op, rest) = match stmt.find(char::is_whitespace) {
            Some(i) => (&stmt[..i], stmt[i..].trim()),
            None => (stmt, ""),
        };
        match op {
            "pl_code" | "c_code" => {
                let mut parts = rest.split_whitespace();
                let (Some(vis), Some(name), None) = (parts.next(), parts.next(), parts.next()) else {
                    return err(line_no, format!("malformed {op} declaration"));
                };
                let vis = parse_vis(vis, line_no)?;
                if vis == Vis::Initializer {
                    if op == "pl_code" {
                        return err(line_no, "pl_code cannot be an initializer");
                    }
                    initializers += 1;
                    if initializers > 1 {
                        return err(line_no, "more than one initializer");
                    }
                }
                if !is_ident(name) {
                    return err(line_no, format!("bad symbol {name:?}"));
                }
                if let Some(b) = cur.take() {
                    obj.items.push(MaItem::Code(b));
                }
                let kind = if op == "pl_code" { CodeKind::Pl } else { CodeKind::C };
                cur = Some(CodeBlock { kind, vis, name: name.to_string(), body: Vec::new() });
            }
            "long" => {
                if let Some(b) = cur.take() {
                    obj.items.push(MaItem::Code(b));
                }
                let (decl, init) = match rest.split_once('=') {
                    Some((d, v)) => match v.trim().parse::<i64>() {
                        Ok(v) => (d.trim(), Some(v)),
                        Err(_) => return err(line_no, "bad initial value"),
                    },
                    None => (rest, None),
                };
                let (vis, spec) = decl.split_once(char::is_whitespace).unwrap_or((decl, ""));
                let vis = parse_vis(vis, line_no)?;
                if vis == Vis::Initializer {
                    return err(line_no, "long cannot be an initializer");
                }
                let Some((name, size)) = indexed(spec.trim()) else {
                    return err(line_no, "malformed long declaration");
                };
                obj.items.push(MaItem::Long(LongDecl { vis, name, size, init }));
            }
            _ => {
                let Some(block) = cur.as_mut() else {
                    return err(line_no, "instruction outside a code block");
                };
                if let Some(l) = stmt.strip_suffix(':') {
                    if !is_ident(l) {
                        return err(line_no, format!("bad label {l:?}"));
                    }
                    block.body.push(MaInstr::Label(l.to_string()));
                } else {
                    block.body.push(parse_instr(op, rest, line_no)?);
                }
            }
        }
    }
    if let Some(b) = cur.take() {
        obj.items.push(MaItem::Code(b));
    }
    Ok(obj)
}
