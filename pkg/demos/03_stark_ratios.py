# Ratios of Stark shifts of higher transitions to the ge shift, with and
# without the resonator, and with the coupling truncated to static + DLC.
from lambshift import drive_sweep, paper_device, stark_grid, stark_ratios

spec = paper_device(1)
print(" f_d    eta_ef0(Full)  eta_ef(NoRes)  eta_ef0(S+DLC)  eta_ed0(Full)  eta_ed0(S+DLC)")
for fd in (3.55, 3.85, 4.05, 4.14, 4.2):
    grid = stark_grid(spec, fd)  # keeps the ge shift well inside the quadratic regime
    r = {v: stark_ratios(drive_sweep(spec, fd, grid, v).observables)
         for v in ("Full", "NoResonator", "StaticPlusDlcOnly")}
    print(f"{fd:5.2f} {r['Full'].eta_ef:13.4f} {r['NoResonator'].eta_ef:14.4f} "
          f"{r['StaticPlusDlcOnly'].eta_ef:15.4f} {r['Full'].eta_ed:14.4f} "
          f"{r['StaticPlusDlcOnly'].eta_ed:15.4f}")

# the ratios do not care how the amplitude axis is scaled
grid = stark_grid(spec, 4.0)
a = stark_ratios(drive_sweep(spec, 4.0, grid, "NoResonator").observables)
b = stark_ratios(drive_sweep(spec, 4.0, 0.5 * grid, "NoResonator").observables)
print(f"rescaled grid: eta_ef {a.eta_ef:.5f} -> {b.eta_ef:.5f}")
