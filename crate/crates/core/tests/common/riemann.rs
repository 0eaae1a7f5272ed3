//! Exact solution of the 1D Euler Riemann problem for an ideal gas
//! (two-shock / two-rarefaction star-state iteration).

#[derive(Debug, Clone, Copy)]
pub struct State {
    pub rho: f64,
    pub u: f64,
    pub p: f64,
}

fn sound(s: State, g: f64) -> f64 {
    (g * s.p / s.rho).sqrt()
}

/// Pressure function of one side and its derivative.
fn side(p: f64, s: State, g: f64) -> (f64, f64) {
    let c = sound(s, g);
    if p > s.p {
        let a = 2.0 / ((g + 1.0) * s.rho);
        let b = (g - 1.0) / (g + 1.0) * s.p;
        let q = (a / (p + b)).sqrt();
        ((p - s.p) * q, q * (1.0 - 0.5 * (p - s.p) / (b + p)))
    } else {
        let r = p / s.p;
        let e = (g - 1.0) / (2.0 * g);
        (
            2.0 * c / (g - 1.0) * (r.powf(e) - 1.0),
            1.0 / (s.rho * c) * r.powf(-(g + 1.0) / (2.0 * g)),
        )
    }
}

/// Star pressure and velocity.
pub fn star(l: State, r: State, g: f64) -> (f64, f64) {
    let mut p = 0.5 * (l.p + r.p);
    for _ in 0..100 {
        let (fl, dl) = side(p, l, g);
        let (fr, dr) = side(p, r, g);
        let next = (p - (fl + fr + r.u - l.u) / (dl + dr)).max(1e-12);
        let done = (next - p).abs() < 1e-14 * p;
        p = next;
        if done {
            break;
        }
    }
    let (fl, _) = side(p, l, g);
    let (fr, _) = side(p, r, g);
    (p, 0.5 * (l.u + r.u) + 0.5 * (fr - fl))
}

/// Solution sampled at similarity coordinate `xi = (x - x0) / t`.
pub fn sample(l: State, r: State, g: f64, xi: f64) -> State {
    let (ps, us) = star(l, r, g);
    let gm = (g - 1.0) / (g + 1.0);
    if xi <= us {
        let c = sound(l, g);
        if ps > l.p {
            let s = l.u - c * ((g + 1.0) / (2.0 * g) * ps / l.p + (g - 1.0) / (2.0 * g)).sqrt();
            if xi <= s {
                l
            } else {
                State {
                    rho: l.rho * (ps / l.p + gm) / (gm * ps / l.p + 1.0),
                    u: us,
                    p: ps,
                }
            }
        } else {
            let cs = c * (ps / l.p).powf((g - 1.0) / (2.0 * g));
            if xi <= l.u - c {
                l
            } else if xi >= us - cs {
                State {
                    rho: l.rho * (ps / l.p).powf(1.0 / g),
                    u: us,
                    p: ps,
                }
            } else {
                let u = 2.0 / (g + 1.0) * (c + (g - 1.0) / 2.0 * l.u + xi);
                let cf = 2.0 / (g + 1.0) * (c + (g - 1.0) / 2.0 * (l.u - xi));
                State {
                    rho: l.rho * (cf / c).powf(2.0 / (g - 1.0)),
                    u,
                    p: l.p * (cf / c).powf(2.0 * g / (g - 1.0)),
                }
            }
        }
    } else {
        let c = sound(r, g);
        if ps > r.p {
            let s = r.u + c * ((g + 1.0) / (2.0 * g) * ps / r.p + (g - 1.0) / (2.0 * g)).sqrt();
            if xi >= s {
                r
            } else {
                State {
                    rho: r.rho * (ps / r.p + gm) / (gm * ps / r.p + 1.0),
                    u: us,
                    p: ps,
                }
            }
        } else {
            let cs = c * (ps / r.p).powf((g - 1.0) / (2.0 * g));
            if xi >= r.u + c {
                r
            } else if xi <= us + cs {
                State {
                    rho: r.rho * (ps / r.p).powf(1.0 / g),
                    u: us,
                    p: ps,
                }
            } else {
                let u = 2.0 / (g + 1.0) * (-c + (g - 1.0) / 2.0 * r.u + xi);
                let cf = 2.0 / (g + 1.0) * (c - (g - 1.0) / 2.0 * (r.u - xi));
                State {
                    rho: r.rho * (cf / c).powf(2.0 / (g - 1.0)),
                    u,
                    p: r.p * (cf / c).powf(2.0 * g / (g - 1.0)),
                }
            }
        }
    }
}

/// Speeds of the right-moving shock (if any) and of the contact.
pub fn shock_and_contact_speeds(l: State, r: State, g: f64) -> (f64, f64) {
    let (ps, us) = star(l, r, g);
    let c = sound(r, g);
    let shock = r.u + c * ((g + 1.0) / (2.0 * g) * ps / r.p + (g - 1.0) / (2.0 * g)).sqrt();
    (shock, us)
}
