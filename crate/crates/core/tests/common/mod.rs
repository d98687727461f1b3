//! Reference residual tables for the noise-free, moderate and heavy-noise patterns:
//! (group, J_complex, J_amplitude, N). The p2 amplitude residual is zero by Friedel symmetry.

#![allow(dead_code)]

use planesym::hierarchy::{ResidualRow, ResidualTable};
use planesym::symmetrize::plane_groups;

pub type Row = (&'static str, f64, Option<f64>, usize);

pub const NOISE_FREE: [Row; 13] = [
    ("p2", 0.0042, None, 956),
    ("p1m1", 1.8799, Some(0.0052), 937),
    ("p11m", 1.8642, Some(0.0052), 937),
    ("p1g1", 0.0094, Some(0.0052), 934),
    ("p11g", 0.0081, Some(0.0052), 934),
    ("c1m1", 0.0103, Some(0.0053), 924),
    ("c11m", 0.0100, Some(0.0053), 924),
    ("p3", 2.5290, Some(1.3339), 954),
    ("p2gg", 0.0096, Some(0.0052), 931),
    ("c2mm", 0.0119, Some(0.0053), 924),
    ("p4", 0.0065, Some(0.0021), 948),
    ("p4mm", 1.9558, Some(0.0063), 918),
    ("p4gm", 0.0102, Some(0.0061), 912),
];

pub const MODERATE: [Row; 13] = [
    ("p2", 0.0041, None, 665),
    ("p1m1", 1.7207, Some(0.0041), 654),
    ("p11m", 1.7210, Some(0.0041), 654),
    ("p1g1", 0.0059, Some(0.0041), 652),
    ("p11g", 0.0066, Some(0.0041), 652),
    ("c1m1", 0.0081, Some(0.0043), 655),
    ("c11m", 0.0081, Some(0.0043), 655),
    ("p3", 2.0554, Some(1.3052), 685),
    ("p2gg", 0.0066, Some(0.0041), 650),
    ("c2mm", 0.0102, Some(0.0043), 655),
    ("p4", 0.0040, Some(0.0015), 648),
    ("p4mm", 1.7934, Some(0.0050), 644),
    ("p4gm", 0.0074, Some(0.0050), 640),
];

pub const HEAVY: [Row; 13] = [
    ("p2", 0.0061, None, 275),
    ("p1m1", 1.5353, Some(0.0039), 271),
    ("p11m", 1.5320, Some(0.0039), 271),
    ("p1g1", 0.0069, Some(0.0039), 265),
    ("p11g", 0.0078, Some(0.0039), 270),
    ("c1m1", 0.0085, Some(0.0041), 269),
    ("c11m", 0.0074, Some(0.0041), 269),
    ("p3", 1.7565, Some(1.2029), 306),
    ("p2gg", 0.0098, Some(0.0039), 264),
    ("c2mm", 0.0115, Some(0.0041), 269),
    ("p4", 0.0088, Some(0.0028), 276),
    ("p4mm", 1.5876, Some(0.0053), 276),
    ("p4gm", 0.0109, Some(0.0051), 266),
];

pub fn table(rows: &[Row]) -> ResidualTable {
    let plane = plane_groups()
        .iter()
        .map(|g| {
            if g.name == "p1" {
                return ResidualRow::new("p1", 1, rows[0].3, 0.0, 0.0);
            }
            match rows.iter().find(|r| r.0 == g.name) {
                // p2 amplitude residual is zero by Friedel symmetry
                Some(&(id, jc, ja, n)) => ResidualRow::new(id, g.k(), n, jc, ja.unwrap_or(0.0)),
                None => ResidualRow::not_applicable(g.name, g.k()),
            }
        })
        .collect();
    ResidualTable::with_laue_from_plane(plane, None)
}
