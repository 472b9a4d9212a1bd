"""
Experiment Runner Service.

Orchestrates one CLI experiment: reads inputs, calls the operations layer
and hands results to the plot-data exporter.

Commands and the studies they reproduce:
- modes:           transverse mode table, optionally fitted to a measured spectrum
- bs-scan:         single-phonon transfer vs pulse time for a calibrated pair
- hom:             two-phonon interference dip vs mixing angle
- phase-scan:      output populations vs the phase of one splitter
- tomography:      reconstruction from simulated or recorded counts
- optimize-config: search for well-conditioned tomography settings
- noise-sim:       beam-splitter error vs noise rate, or the R1/R2 landscape
- scaling:         mode spacing, splitter duration or connectivity vs ion number
- heating-fit:     heating rate from BSB traces or fitted occupations
"""

import dataclasses
import logging
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np
import pandas as pd

from config.constants import (
    DEFAULT_P_BRIGHT_GIVEN_DARK,
    DEFAULT_P_DARK_GIVEN_BRIGHT,
    FIVE_ION_SPECTRUM_HZ,
)
from config.run_context import RunContext
from domain.exceptions import ConfigError, PhononetError
from domain.models import DetectionModel, ExperimentSpec, TrapParams, TruncatedHilbert
from operations import (
    assign_ion_for_pair,
    bs_duration_scaling,
    bs_population_scan,
    build_chain,
    build_drive,
    compensate_phases,
    connectivity_stats,
    density_from_state,
    embed_with_ancillas,
    error_budget,
    fidelity_landscape,
    fit_axial_frequency,
    fit_heating,
    fitted_five_ion_chain,
    four_splitter_template,
    heating_rate_from_points,
    hom_scan,
    hom_visibility,
    measurement_from_counts,
    mode_spacing_scaling,
    mode_table_to_dict,
    optimize_configuration,
    phase_scan,
    reconstruct,
    reference_beam_splitter,
    simulate_bs_full,
    simulate_measurement,
    single_splitter_template,
    spacing_for_min_frequency,
    synthetic_heating_series,
    build_superoperator,
)
from operations.dynamics_ops import single_phonon_hilbert, state_mode_populations
from operations.lindblad_ops import measured_noise_model, noisy_bs_error
from .config_reader import ConfigReader, config_to_document
from .export_service import PlotDataExporter, complex_matrix_to_json
from .measurement_reader import MeasurementReader
from .state_parser import format_state, parse_state

logger = logging.getLogger(__name__)


class ExperimentRunner:
    """
    Runs one ExperimentSpec and writes its artifacts.

    Handlers read their knobs from spec.options (already parsed by the CLI)
    and their files from spec.inputs.
    """

    def __init__(self, ctx: RunContext):
        self.ctx = ctx
        self.exporter = PlotDataExporter(ctx)
        self._handlers: Dict[str, Callable[[ExperimentSpec], None]] = {
            "modes": self._run_modes,
            "bs-scan": self._run_bs_scan,
            "hom": self._run_hom,
            "phase-scan": self._run_phase_scan,
            "tomography": self._run_tomography,
            "optimize-config": self._run_optimize_config,
            "noise-sim": self._run_noise_sim,
            "scaling": self._run_scaling,
            "heating-fit": self._run_heating_fit,
        }

    def run(self, spec: ExperimentSpec) -> List[Path]:
        """
        Execute spec and return the written files.

        Raises:
            PhononetError: Any parse, physics or export failure
        """
        logger.info(f"Running {spec.command} (seed={self.ctx.seed}, shots={self.ctx.shots})")
        self._handlers[spec.command](spec)
        logger.info(f"{spec.command} finished: {len(self.exporter.written)} files written")
        return list(self.exporter.written)

    @staticmethod
    def _config(spec: ExperimentSpec, **extra: Any) -> Dict[str, Any]:
        return {"inputs": dict(spec.inputs), "options": dict(spec.options), **extra}

    @staticmethod
    def _require_input(spec: ExperimentSpec, key: str) -> Path:
        if not spec.inputs.get(key):
            raise ConfigError(f"{spec.command} needs --{key}", details={"field": key})
        return Path(spec.inputs[key])

    # ==================== Ion chain ====================

    def _run_modes(self, spec: ExperimentSpec) -> None:
        opts = spec.options
        n_ions = int(opts.get("ions", 5))
        fit_doc: Optional[Dict[str, Any]] = None

        if spec.inputs.get("spectrum"):
            measured = ConfigReader(Path(spec.inputs["spectrum"])).read_spectrum()
            placeholder = TrapParams(n_ions=n_ions, nu_com_transverse=opts.get("nu_com") or max(measured), nu_axial=0.1 * max(measured))
            fit = fit_axial_frequency(measured, placeholder)
            params = dataclasses.replace(placeholder, nu_axial=fit.nu_axial, nu_com_transverse=fit.nu_com_transverse)
            fit_doc = {
                "measured_hz": measured,
                "model_hz": list(fit.model_frequencies),
                "nu_axial_hz": fit.nu_axial,
                "nu_com_hz": fit.nu_com_transverse,
                "rms_residual_hz": fit.rms_residual,
            }
        elif opts.get("nu_axial") is not None:
            spacing = opts.get("spacing_um")
            params = TrapParams(
                n_ions=n_ions,
                nu_com_transverse=opts.get("nu_com") or max(FIVE_ION_SPECTRUM_HZ),
                nu_axial=opts["nu_axial"],
                fixed_spacing=None if spacing is None else spacing * 1e-6,
            )
        elif n_ions == 5:
            params = None
        else:
            raise ConfigError("modes needs --fit-spectrum or --nu-axial for chains other than five ions", details={"field": "nu_axial"})

        modes = fitted_five_ion_chain() if params is None else build_chain(params)
        pairs = [
            {"m": m + 1, "n": n + 1, "ion": assign_ion_for_pair(modes, m, n) + 1}
            for m in range(modes.n_modes)
            for n in range(m + 1, modes.n_modes)
        ]
        document = {"mode_table": mode_table_to_dict(modes, params), "pair_assignment": pairs}
        if fit_doc is not None:
            document["fit"] = fit_doc
        self.exporter.write_document("modes", document, self._config(spec))

    # ==================== Network ====================

    def _run_bs_scan(self, spec: ExperimentSpec) -> None:
        opts = spec.options
        pair = tuple(opts.get("pair", (1, 2)))
        times = np.asarray(opts["times"], dtype=float)
        splitter = reference_beam_splitter(pair, ramp_fraction=opts.get("ramp_fraction"))

        if opts.get("model", "effective") == "effective":
            table = bs_population_scan(splitter, times)
        else:
            chain = fitted_five_ion_chain()
            splitter = dataclasses.replace(splitter, duration=float(times.max()))
            carrier = bool(opts.get("carrier", False))
            if carrier:
                hilbert = TruncatedHilbert.for_phonons(splitter.modes, 1, guard=2, spin_ion=splitter.ion_j)
            else:
                hilbert = single_phonon_hilbert(splitter.modes, spin_ion=splitter.ion_j)
            drive = build_drive(splitter, chain, include_carrier=carrier)
            start = tuple(1 if mode == splitter.mode_m else 0 for mode in hilbert.modes)
            trajectory = simulate_bs_full(
                drive, chain, hilbert, {(0, start): 1.0}, times=times,
                rtol=self.ctx.settings.ode_rtol, atol=self.ctx.settings.ode_atol,
            )
            populations = state_mode_populations(trajectory.states, trajectory.basis)
            table = pd.DataFrame(
                {
                    "time_s": trajectory.times,
                    "theta_rad": trajectory.theta,
                    "p_m": populations[:, hilbert.position_of(splitter.mode_m)],
                    "p_n": populations[:, hilbert.position_of(splitter.mode_n)],
                },
                columns=["time_s", "theta_rad", "p_m", "p_n"],
            )
        self.exporter.write_table("bs-scan", table, self._config(spec))

    def _run_hom(self, spec: ExperimentSpec) -> None:
        table = hom_scan(np.asarray(spec.options["thetas"], dtype=float))
        visibility = hom_visibility(table) if not table.empty else float("nan")
        logger.info(f"HOM visibility {visibility:.6f}, minimum P(1,1) = {table['p_11'].min() if not table.empty else float('nan'):.3e}")
        self.exporter.write_table("hom", table, self._config(spec, visibility=visibility))

    def _run_phase_scan(self, spec: ExperimentSpec) -> None:
        opts = spec.options
        config = ConfigReader(self._require_input(spec, "config")).read_interferometer()
        if opts.get("compensate"):
            config = compensate_phases(config, fitted_five_ion_chain())
        state = parse_state(opts["state"])
        ancillas = config.n_modes - state.sector.n_modes
        if ancillas < 0:
            raise ConfigError("Input state has more modes than the interferometer", details={"field": "input"})
        rho = embed_with_ancillas(density_from_state(state), ancillas)
        splitter = opts.get("splitter")
        index = len(config.splitters) - 1 if splitter is None else int(splitter) - 1
        table = phase_scan(config, rho, np.asarray(opts["phis"], dtype=float), bs_index=index)
        self.exporter.write_table("phase-scan", table, self._config(spec, config_resolved=config_to_document(config)))

    # ==================== Tomography ====================

    def _detection(self, spec: ExperimentSpec, reader: ConfigReader, n_modes: int) -> Optional[DetectionModel]:
        if not spec.options.get("binary"):
            return None
        model = reader.read_detection(n_modes)
        if model is None:
            model = DetectionModel.from_error_rates(
                list(range(n_modes)),
                float(spec.options.get("p_bright_given_dark", DEFAULT_P_BRIGHT_GIVEN_DARK)),
                float(spec.options.get("p_dark_given_bright", DEFAULT_P_DARK_GIVEN_BRIGHT)),
            )
        return model

    def _run_tomography(self, spec: ExperimentSpec) -> None:
        opts = spec.options
        reader = ConfigReader(self._require_input(spec, "config"))
        expression = opts.get("state") or reader.read_state()
        target = parse_state(expression) if expression else None

        if target is not None:
            setup = reader.read_tomography_setup(target.sector.total_phonons, input_modes=target.sector.n_modes)
        elif opts.get("phonons") is not None:
            setup = reader.read_tomography_setup(int(opts["phonons"]))
        else:
            raise ConfigError("tomography needs --input or --phonons", details={"field": "input"})
        detection = self._detection(spec, reader, setup.output_sector.n_modes)

        if spec.inputs.get("counts"):
            tables, binary = MeasurementReader(Path(spec.inputs["counts"])).read_counts()
            measurement = measurement_from_counts(setup, tables, binary=binary, detection=detection)
        elif target is not None:
            measurement = simulate_measurement(
                target, setup, shots=self.ctx.shots, seed=self.ctx.seed,
                detection=detection, correct=not opts.get("no_correct", False),
            )
        else:
            raise ConfigError("tomography without counts needs an input state", details={"field": "input"})

        superop = build_superoperator(setup)
        result = reconstruct(measurement, superop, target=target)
        model = np.real(superop.matrix @ result.rho_ml.reshape(-1))
        measured = measurement.stacked()
        rows = [
            {"setting": g + 1, "occupation": label, "p_measured": float(measured[k]), "p_reconstructed": float(model[k])}
            for k, (g, label) in enumerate(superop.row_labels())
        ]
        report = {
            "state": None if target is None else format_state(target),
            "basis": setup.input_sector.labels(),
            "rho": complex_matrix_to_json(result.rho_ml),
            "rho_raw": complex_matrix_to_json(result.rho_raw),
            "fidelity": result.fidelity_to_target,
            "purity": result.purity,
            "condition_number": result.condition_number,
            "clipped_eigenmass": result.clipped_eigenmass,
            "dropped_singular_values": result.dropped_singular_values,
            "n_settings": setup.n_settings,
            "shots": measurement.shots,
        }
        config = self._config(spec, settings=[config_to_document(c) for c in setup.configs])
        self.exporter.write_document("tomography", report, config)
        self.exporter.write_table(
            "tomography_probabilities",
            pd.DataFrame(rows, columns=["setting", "occupation", "p_measured", "p_reconstructed"]),
            config,
        )

    def _run_optimize_config(self, spec: ExperimentSpec) -> None:
        opts = spec.options
        kind = opts.get("template", "single")
        if kind == "single":
            template = single_splitter_template(int(opts.get("settings", 3)))
        elif kind == "four":
            template = four_splitter_template(int(opts.get("phonons", 1)))
        else:
            raise ConfigError("Unknown template", details={"field": "template", "value": kind})
        result = optimize_configuration(template, n_starts=int(opts.get("starts", 32)), seed=self.ctx.seed)
        document = {
            "template": kind,
            "log_det": result.log_det,
            "det": result.det,
            "parameters": {p.name: float(v) for p, v in zip(template.parameters, result.parameters)},
            "input_modes": result.setup.input_sector.n_modes,
            "settings": [config_to_document(c) for c in result.setup.configs],
        }
        self.exporter.write_document("optimize-config", document, self._config(spec))

    # ==================== Dynamics ====================

    def _run_noise_sim(self, spec: ExperimentSpec) -> None:
        opts = spec.options
        kind = opts.get("kind", "heating")
        if kind == "landscape":
            table = fidelity_landscape(opts["r1_values"], opts["r2_values"], max_workers=self.ctx.max_workers)
            self.exporter.write_table("noise-sim_landscape", table, self._config(spec))
            return
        if kind == "measured":
            error = noisy_bs_error(measured_noise_model())
            logger.info(f"Added error at the measured rates: {error:.4%}")
            table = pd.DataFrame({"rate": [float("nan")], "error": [error]}, columns=["rate", "error"])
        else:
            rates = opts.get("rates")
            if not rates:
                raise ConfigError("noise-sim needs --rates", details={"field": "rates"})
            table = error_budget(kind, rates, collective=bool(opts.get("collective", False)), max_workers=self.ctx.max_workers)
            if len(table) >= 2:
                slope, intercept = np.polyfit(table["rate"], table["error"], 1)
                residual = table["error"] - (slope * table["rate"] + intercept)
                spread = float(np.sum((table["error"] - table["error"].mean()) ** 2))
                r_squared = 1.0 - float(np.sum(residual**2)) / spread if spread > 0 else 1.0
                logger.info(f"Linear trend: {slope:.3e} per unit rate, R² = {r_squared:.4f}")
        self.exporter.write_table(f"noise-sim_{kind}", table, self._config(spec))

    def _run_scaling(self, spec: ExperimentSpec) -> None:
        opts = spec.options
        ions = sorted({int(round(n)) for n in opts["ions"]})
        nu_com = float(opts.get("nu_com", 5e6))
        nu_min = float(opts.get("nu_min", 1e6))
        study = opts.get("study", "duration")
        spacing = spacing_for_min_frequency(nu_com, nu_min)
        params = TrapParams(n_ions=max(ions), nu_com_transverse=nu_com, nu_axial=0.1 * nu_com, fixed_spacing=spacing)
        logger.info(f"Equal-spacing chains at d = {spacing * 1e6:.3f} µm ({study} study, {len(ions)} sizes)")

        if study == "duration":
            table = bs_duration_scaling(ions, params, float(opts.get("r1", 1.5)), float(opts.get("r2", 3.0)), float(opts.get("ramp_fraction", 0.0)))
        elif study == "spacing":
            table = mode_spacing_scaling(ions, params)
        elif study == "connectivity":
            rows = []
            for n in ions:
                stats = connectivity_stats(n, "equal")
                rows.append(
                    {
                        "n_ions": n,
                        "fraction_above_1_over_n": stats.fraction_above_threshold,
                        "mean_best_product_times_n": stats.mean_best_product * n,
                        "std_best_product_times_n": stats.std_best_product * n,
                    }
                )
            table = pd.DataFrame(rows, columns=["n_ions", "fraction_above_1_over_n", "mean_best_product_times_n", "std_best_product_times_n"])
        else:
            raise ConfigError("Unknown scaling study", details={"field": "study", "value": study})
        self.exporter.write_table(f"scaling_{study}", table, self._config(spec, spacing_m=spacing))

    def _run_heating_fit(self, spec: ExperimentSpec) -> None:
        opts = spec.options
        rabi_hz = float(opts.get("rabi_hz", 10e3))
        decay = float(opts.get("decay_rate", 0.0))

        if spec.inputs.get("traces"):
            fit = fit_heating(MeasurementReader(Path(spec.inputs["traces"])).read_bsb_traces(), rabi_hz, decay)
        elif spec.inputs.get("nbar_points"):
            waits, nbars, errors = MeasurementReader(Path(spec.inputs["nbar_points"])).read_nbar_points()
            fit = heating_rate_from_points(waits, nbars, errors)
        elif opts.get("synthetic_rate") is not None:
            waits = opts.get("waits") or [0.0, 1e-3, 2e-3, 3e-3, 4e-3]
            pulse_times = np.linspace(0.0, 4.0 / rabi_hz, 161)
            series = synthetic_heating_series(
                float(opts["synthetic_rate"]), waits, pulse_times, rabi_hz,
                decay_rate=decay, noise_sigma=float(opts.get("noise_sigma", 0.0)), rng=self.ctx.rng(),
            )
            fit = fit_heating(series, rabi_hz, decay)
        else:
            raise ConfigError("heating-fit needs --traces, --nbar-points or --synthetic-rate", details={"field": "traces"})

        low, high = fit.ci95
        table = pd.DataFrame(
            {
                "wait_s": fit.wait_times,
                "nbar": fit.nbars,
                "nbar_err": fit.nbar_errors,
                "nbar_model": fit.offset + fit.rate * np.asarray(fit.wait_times),
            },
            columns=["wait_s", "nbar", "nbar_err", "nbar_model"],
        )
        summary = {"rate_quanta_per_s": fit.rate, "rate_stderr": fit.rate_stderr, "ci95": [low, high], "offset": fit.offset}
        self.exporter.write_table("heating-fit", table, self._config(spec, fit=summary))


def run_experiment(spec: ExperimentSpec, ctx: RunContext) -> List[Path]:
    """Run spec under ctx; the written files are returned."""
    try:
        return ExperimentRunner(ctx).run(spec)
    except PhononetError:
        raise
    except (ValueError, KeyError) as e:
        raise ConfigError(f"Invalid options for {spec.command}: {e}", details={"command": spec.command}) from e
