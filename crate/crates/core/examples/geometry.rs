//! Support functions, flower areas and Steiner points of a few bodies.

use flowercell::flower::{flower_area, steiner_point};
use flowercell::{ConvexBody, Result};

fn main() -> Result<()> {
    let bodies = [
        ("unit disk", ConvexBody::unit_disk()),
        ("square [-1,1]^2", ConvexBody::unit_square()),
        ("ellipse 1.5 x 0.6", ConvexBody::ellipse([0.2, -0.1], 1.5, 0.6, 0.4)?),
        ("regular pentagon", ConvexBody::regular_polygon(5, 1.0, 0.0)?),
    ];
    for (name, k) in &bodies {
        let st = steiner_point(k)?;
        println!(
            "{name:>18}: area {:.6}  A(F_o) {:.6}  A(F_st) {:.6}  st = ({:.5}, {:.5})",
            k.area(),
            flower_area(k, [0.0, 0.0])?,
            flower_area(k, st)?,
            st[0],
            st[1]
        );
    }
    Ok(())
}
