//! Crank–Nicolson against the separable solution `e^{-π²t} sin(πx)`.

use stackelberg_heat::experiment::heat_order_study;

fn main() -> stackelberg_heat::Result<()> {
    println!("{:>6} {:>6} {:>14} {:>8}", "n", "steps", "max error", "order");
    for row in heat_order_study(&[25, 50, 100, 200], 0.5)? {
        let order = row.order.map_or_else(|| "-".to_owned(), |o| format!("{o:.3}"));
        println!("{:>6} {:>6} {:>14.6e} {:>8}", row.n_interior, row.n_steps, row.max_error, order);
    }
    Ok(())
}
