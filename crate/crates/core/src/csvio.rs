//! CSV persistence for skeleton and MAP paths.
//!
//! Skeleton columns: `t,v1..vd,tag,jump_coord,jump_size`. MAP columns:
//! `t,xi,theta1..thetad,tag,jump_coord,jump_size`. Path-level metadata (horizon, status, lifetime) lives
//! in `#`-prefixed lines above the mandatory header. `inf`/`-inf` are valid numeric literals.

use crate::error::{Error, Result};
use crate::path::{EventTag, JumpMark, Lifetime, MapPath, PathStatus, SkeletonPath};
use std::io::{BufRead, BufReader, Read, Write};

fn fmt(x: f64) -> String {
    format!("{x}")
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{s:?}: {e}")))
}

fn status_str(s: &PathStatus) -> String {
    match s {
        PathStatus::Alive => "alive".into(),
        PathStatus::Killed { time, coord, overshoot } => {
            let c = coord.map_or("none".to_string(), |c| c.to_string());
            format!("killed:{}:{}:{}", fmt(*time), c, fmt(*overshoot))
        }
        PathStatus::Absorbed { time } => format!("absorbed:{}", fmt(*time)),
    }
}

fn parse_status(s: &str) -> Result<PathStatus> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        ["alive"] => Ok(PathStatus::Alive),
        ["killed", t, c, o] => Ok(PathStatus::Killed {
            time: parse_f64(t)?,
            coord: if *c == "none" { None } else { Some(c.parse().map_err(|_| Error::Parse(c.to_string()))?) },
            overshoot: parse_f64(o)?,
        }),
        ["absorbed", t] => Ok(PathStatus::Absorbed { time: parse_f64(t)? }),
        _ => Err(Error::Parse(format!("bad status {s:?}"))),
    }
}

/// Splits `# key=value` preamble lines from the CSV body.
fn split_preamble<R: Read>(r: R) -> Result<(Vec<(String, String)>, String)> {
    let mut meta = Vec::new();
    let mut body = String::new();
    for line in BufReader::new(r).lines() {
        let line = line?;
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.trim().split_once('=') {
                meta.push((k.trim().to_string(), v.trim().to_string()));
            }
        } else if !line.trim().is_empty() {
            body.push_str(&line);
            body.push('\n');
        }
    }
    Ok((meta, body))
}

fn meta_get<'a>(meta: &'a [(String, String)], key: &str) -> Result<&'a str> {
    meta.iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
        .ok_or_else(|| Error::Parse(format!("missing metadata {key}")))
}

pub fn write_skeleton<W: Write>(path: &SkeletonPath, mut w: W) -> Result<()> {
    writeln!(w, "# horizon={}", fmt(path.horizon))?;
    writeln!(w, "# status={}", status_str(&path.status))?;
    let d = path.dim();
    let mut wr = csv::Writer::from_writer(w);
    let mut header = vec!["t".to_string()];
    header.extend((1..=d).map(|i| format!("v{i}")));
    header.extend(["tag".into(), "jump_coord".into(), "jump_size".into()]);
    wr.write_record(&header)?;
    for k in 0..path.len() {
        let mut rec = vec![fmt(path.times[k])];
        rec.extend(path.value(k).iter().map(|&v| fmt(v)));
        rec.push(path.tags[k].as_str().into());
        match path.marks[k] {
            Some(m) => {
                rec.push((m.coord + 1).to_string());
                rec.push(fmt(m.size));
            }
            None => {
                rec.push(String::new());
                rec.push(String::new());
            }
        }
        wr.write_record(&rec)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_skeleton<R: Read>(r: R) -> Result<SkeletonPath> {
    let (meta, body) = split_preamble(r)?;
    let mut rd = csv::Reader::from_reader(body.as_bytes());
    let header = rd.headers()?.clone();
    let d = header.iter().filter(|h| h.starts_with('v')).count();
    if header.get(0) != Some("t") || d == 0 {
        return Err(Error::Parse("skeleton header must be t,v1..vd[,tag,jump_coord,jump_size]".into()));
    }
    let has_tags = header.len() >= d + 2;
    let (mut times, mut values, mut marks, mut tags) = (vec![], vec![], vec![], vec![]);
    for (k, rec) in rd.records().enumerate() {
        let rec = rec?;
        times.push(parse_f64(&rec[0])?);
        for i in 0..d {
            values.push(parse_f64(&rec[1 + i])?);
        }
        let tag = if has_tags {
            EventTag::parse(&rec[d + 1])?
        } else if k == 0 {
            EventTag::Start
        } else {
            EventTag::Grid
        };
        let mark = match (rec.get(d + 2), rec.get(d + 3)) {
            (Some(c), Some(s)) if !c.is_empty() => {
                let coord: usize = c.parse().map_err(|_| Error::Parse(format!("coord {c:?}")))?;
                if coord == 0 {
                    return Err(Error::Parse("jump_coord is 1-based".into()));
                }
                Some(JumpMark { coord: coord - 1, size: parse_f64(s)? })
            }
            _ => None,
        };
        tags.push(tag);
        marks.push(mark);
    }
    let horizon = match meta_get(&meta, "horizon") {
        Ok(h) => parse_f64(h)?,
        Err(_) => *times.last().ok_or_else(|| Error::Parse("no rows".into()))?,
    };
    let status = match meta_get(&meta, "status") {
        Ok(s) => parse_status(s)?,
        Err(_) => PathStatus::Alive,
    };
    SkeletonPath::from_parts(d, times, values, marks, tags, status, horizon)
}

pub fn write_map<W: Write>(path: &MapPath, mut w: W) -> Result<()> {
    let lt = match path.lifetime {
        Lifetime::Finite(z) => format!("finite:{}", fmt(z)),
        Lifetime::Censored(z) => format!("censored:{}", fmt(z)),
    };
    writeln!(w, "# lifetime={lt}")?;
    let d = path.dim();
    let mut wr = csv::Writer::from_writer(w);
    let mut header = vec!["t".to_string(), "xi".to_string()];
    header.extend((1..=d).map(|i| format!("theta{i}")));
    header.extend(["tag".into(), "jump_coord".into(), "jump_size".into()]);
    wr.write_record(&header)?;
    for k in 0..path.len() {
        let mut rec = vec![fmt(path.times[k]), fmt(path.ordinate[k])];
        rec.extend(path.modulator(k).iter().map(|&v| fmt(v)));
        rec.push(path.tags[k].as_str().into());
        rec.push(path.marks[k].map_or(String::new(), |m| (m.coord + 1).to_string()));
        rec.push(path.marks[k].map_or(String::new(), |m| fmt(m.size)));
        wr.write_record(&rec)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_map<R: Read>(r: R) -> Result<MapPath> {
    let (meta, body) = split_preamble(r)?;
    let mut rd = csv::Reader::from_reader(body.as_bytes());
    let header = rd.headers()?.clone();
    let d = header.iter().filter(|h| h.starts_with("theta")).count();
    if header.get(0) != Some("t") || header.get(1) != Some("xi") || d == 0 {
        return Err(Error::Parse("MAP header must be t,xi,theta1..thetad,tag[,jump_coord,jump_size]".into()));
    }
    let mut m = MapPath::new(d);
    let mut theta = vec![0.0; d];
    for rec in rd.records() {
        let rec = rec?;
        let t = parse_f64(&rec[0])?;
        let xi = parse_f64(&rec[1])?;
        for (i, th) in theta.iter_mut().enumerate() {
            *th = parse_f64(&rec[2 + i])?;
        }
        let tag = EventTag::parse(rec.get(d + 2).ok_or_else(|| Error::Parse("missing tag".into()))?)?;
        let mark = match (rec.get(d + 3), rec.get(d + 4)) {
            (Some(c), Some(s)) if !c.is_empty() => {
                let coord: usize = c.parse().map_err(|_| Error::Parse(format!("coord {c:?}")))?;
                let coord = coord.checked_sub(1).ok_or_else(|| Error::Parse("jump_coord is 1-based".into()))?;
                Some(JumpMark { coord, size: parse_f64(s)? })
            }
            _ => None,
        };
        if m.times.last().is_some_and(|&s| !(t > s)) {
            return Err(Error::InvalidPath("times not strictly increasing".into()));
        }
        m.push(t, xi, &theta, mark, tag);
    }
    let lt = meta_get(&meta, "lifetime")?;
    m.lifetime = match lt.split_once(':') {
        Some(("finite", z)) => Lifetime::Finite(parse_f64(z)?),
        Some(("censored", z)) => Lifetime::Censored(parse_f64(z)?),
        _ => return Err(Error::Parse(format!("bad lifetime {lt:?}"))),
    };
    m.validate()?;
    Ok(m)
}
