"""
Experiment Pipeline Orchestrator
Turns a RunConfig into solver calls and output files for each CLI command
"""
import asyncio
import json
import uuid
from concurrent.futures import Executor, ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

from src.cell import (
    EffectiveHamiltonianTable,
    build_table,
    load_or_build_table,
    richardson_effective_value,
    solve_discounted,
    table_cache_key,
)
from src.config import RunConfig
from src.effective import EffectiveHamiltonian, EffectiveProblem, TableHamiltonian, closed_form_for, solve_effective
from src.errors import InvalidArgumentError
from src.experiments import (
    apriori_monitor_suite,
    cone_experiment,
    emit_report,
    forced_cone_experiment,
    run_rate_sweep,
)
from src.flow import ParabolicProblem, evolve, initial_from_config, lipschitz_of_kind, write_trace
from src.grid import GridFunction, GridSpec, write_grid_function
from src.models import CoercivityCertificate, ConeVariant, ExperimentJob, JobStatus, Topology
from src.operator import ForcingField, ModifiedForce, build_modified_force, check_coercivity, force_from_config
from src.utils import cache_file, cleanup_cache, format_vector

COMMANDS = ("check", "evolve", "cell", "table", "effective", "rate", "cone", "monitors")


def _write_json(path: Path, document: Dict[str, Any]) -> Path:
    path.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


class ExperimentPipeline:
    """
    Runs one command of the lab for a validated configuration.

    Every file goes below `out`; table caching uses `out/cache` when enabled.
    Blocking numerics run in a worker thread, and independent work items
    (table samples, eps values) share a pool of `jobs` threads.
    """

    def __init__(
        self,
        config: RunConfig,
        out: Path,
        jobs: int = 1,
        cache_enabled: bool = True,
        cache_keep: int = 50,
        show_progress: bool = False,
    ):
        """
        Args:
            config: Validated run configuration
            out: Output directory (created on demand)
            jobs: Worker threads for independent work items
            cache_enabled: Reuse effective tables from out/cache
            cache_keep: Cached tables kept when the cache is pruned
            show_progress: tqdm bars during table builds
        """
        if jobs < 1:
            raise InvalidArgumentError(f"--jobs must be positive, got {jobs}")
        self.config = config
        self.out = Path(out)
        self.jobs = jobs
        self.cache_enabled = cache_enabled
        self.cache_keep = cache_keep
        self.show_progress = show_progress

        self.n = config.scenario.dimension
        self.lipschitz_bound = lipschitz_of_kind(config.initial, self.n)

        # Job tracking
        self.current_job: Optional[ExperimentJob] = None

    # Scenario pieces

    @property
    def cache_dir(self) -> Optional[Path]:
        return self.out / "cache" if self.cache_enabled else None

    def force(self) -> ForcingField:
        return force_from_config(self.config.force, self.n)

    def flow_force(self) -> Optional[ForcingField]:
        """The force for the solvers, None for c = 0"""
        force = self.force()
        return None if force.is_zero else force

    def certificate(self, force: Optional[ForcingField] = None) -> CoercivityCertificate:
        force = force or self.force()
        return check_coercivity(force, resolution=self.config.solver.coercivity_resolution)

    def modified_force(self) -> ModifiedForce:
        force = self.force()
        return build_modified_force(force, self.config.solver.gradient_bound, self.certificate(force))

    def grid(self) -> GridSpec:
        section = self.config.grid
        if section.topology == Topology.TORUS:
            return GridSpec.torus(self.n, section.points_per_axis)
        return GridSpec.box(self.n, section.points_per_axis, section.L, slope_cap=self.lipschitz_bound)

    def cell_grid(self) -> GridSpec:
        return GridSpec.torus(self.n, self.config.solver.cell_points)

    def initial(self, spec: Optional[GridSpec] = None) -> GridFunction:
        return initial_from_config(self.config.initial, spec or self.grid())

    def _table_options(self) -> Dict[str, Any]:
        solver, experiment = self.config.solver, self.config.experiment
        return {
            "P": experiment.P,
            "samples_per_axis": experiment.samples_per_axis,
            "grid": self.cell_grid(),
            "lambdas": solver.lambdas,
            "stop_tol": solver.stop_tol,
        }

    def _table(self, executor: Optional[Executor]) -> EffectiveHamiltonianTable:
        return load_or_build_table(
            self.modified_force(),
            cache_dir=self.cache_dir,
            keep_latest=self.cache_keep,
            lipschitz_bound=self.lipschitz_bound,
            max_steps=self.config.solver.max_steps,
            executor=executor,
            show_progress=self.show_progress,
            **self._table_options(),
        )

    def hamiltonian(self, executor: Optional[Executor] = None) -> EffectiveHamiltonian:
        """Closed form for zero and constant forces, a (cached) table otherwise"""
        closed = closed_form_for(self.force(), self.n)
        if closed is not None:
            return closed
        return TableHamiltonian(self._table(executor))

    def _executor(self) -> Optional[ThreadPoolExecutor]:
        return ThreadPoolExecutor(max_workers=self.jobs) if self.jobs > 1 else None

    # Commands

    def run_check(self, update: Callable[[int, str], None]) -> List[Path]:
        update(30, "Sampling coercivity margin...")
        certificate = self.certificate()
        print(f"coercivity margin {certificate.min_margin:.6g} "
              f"(slack {certificate.slack:.3g}, delta {certificate.delta:g})")
        return [_write_json(self.out / "certificate.json", certificate.model_dump())]

    def run_evolve(self, update: Callable[[int, str], None]) -> List[Path]:
        solver = self.config.solver
        T = solver.horizon
        update(10, "Evolving rescaled flow...")
        problem = ParabolicProblem(
            initial=self.initial(),
            horizon=T,
            force=self.flow_force(),
            lipschitz_bound=self.lipschitz_bound,
            gradient_bound=solver.gradient_bound,
            safety=solver.safety,
            snapshot_times=[T / 4.0, T / 2.0],
            max_steps=solver.max_steps,
            coercivity_resolution=solver.coercivity_resolution,
        )
        trace = evolve(problem, progress_callback=lambda f: update(10 + int(80 * f), "Evolving rescaled flow..."))
        print(f"{trace.steps} steps, w(0, T) = {trace.final.origin_value:.10g}")
        update(90, "Exporting trace...")
        return write_trace(trace, self.out / "evolve")

    def run_cell(self, update: Callable[[int, str], None]) -> List[Path]:
        solver, cell = self.config.solver, self.config.cell
        force_mod, grid = self.modified_force(), self.cell_grid()
        update(20, f"Solving cell problem at p = {format_vector(cell.p)}...")
        single = solve_discounted(cell.p, cell.lam, force_mod, grid, solver.stop_tol, solver.max_steps)
        update(50, "Extrapolating to vanishing discount...")
        result = richardson_effective_value(cell.p, force_mod, grid, solver.lambdas, solver.stop_tol, solver.max_steps)
        sup_v, sup_dv, sup_d2v = result.corrector.bounds()
        print(f"F_bar(p) = {result.value:.10g} +/- {result.uncertainty:.2e}")
        document = {
            "p": list(cell.p),
            "lambda": cell.lam,
            "F_bar_lambda": single.effective_value,
            "residual": single.residual,
            "F_bar": result.value,
            "uncertainty": result.uncertainty,
            "spread": result.spread,
            "lambdas": list(solver.lambdas),
            "per_lambda": result.per_lambda,
            "corrector_bounds": {"sup_v": sup_v, "sup_dv": sup_dv, "sup_d2v": sup_d2v},
            "warning": result.warning,
        }
        return [
            _write_json(self.out / "cell.json", document),
            write_grid_function(single.corrector, self.out / "corrector.csv"),
        ]

    def run_table(self, update: Callable[[int, str], None]) -> List[Path]:
        force_mod = self.modified_force()
        options = self._table_options()
        update(10, "Building effective Hamiltonian table...")
        with ThreadPoolExecutor(max_workers=self.jobs) as executor:
            table = build_table(
                force_mod,
                lipschitz_bound=self.lipschitz_bound,
                max_steps=self.config.solver.max_steps,
                executor=executor,
                show_progress=self.show_progress,
                **options,
            )
        path = table.write(self.out / "table.csv")
        outputs = [path]
        if self.cache_dir is not None:
            key = table_cache_key(force_mod, **options)
            outputs.append(cache_file(path, self.cache_dir, key, ".csv"))
            cleanup_cache(self.cache_dir, self.cache_keep)
        diagnostics = table.diagnostics
        print(f"table: {table.samples_per_axis ** table.n} samples, slopes {format_vector(table.slopes())}")
        print(f"  max |d2F/dp2| {format_vector(diagnostics['max_abs_d2F_dp2'])}, "
              f"symmetry residual {diagnostics['symmetry_residual']:.3g}")
        return outputs

    def run_effective(self, update: Callable[[int, str], None]) -> List[Path]:
        solver = self.config.solver
        T = solver.horizon
        update(10, "Preparing effective Hamiltonian...")
        with ThreadPoolExecutor(max_workers=self.jobs) as executor:
            hamiltonian = self.hamiltonian(executor)
        update(50, f"Solving effective equation ({hamiltonian.label})...")
        trace = solve_effective(EffectiveProblem(
            hamiltonian=hamiltonian,
            initial=self.initial(),
            horizon=T,
            lipschitz_bound=self.lipschitz_bound,
            theta_pad=solver.theta_pad,
            snapshot_times=[T / 4.0, T / 2.0],
        ))
        print(f"{trace.steps} steps, u(0, T) = {trace.final.origin_value:.10g}")
        return write_trace(trace, self.out / "effective")

    def run_rate(self, update: Callable[[int, str], None]) -> List[Path]:
        solver, experiment = self.config.solver, self.config.experiment
        force = self.flow_force()
        executor = self._executor()
        try:
            update(10, "Preparing effective Hamiltonian...")
            hamiltonian = self.hamiltonian(executor)
            update(30, f"Sweeping {len(experiment.eps_list)} eps values...")
            report = run_rate_sweep(
                force,
                self.initial,
                experiment.T,
                experiment.eps_list,
                window=experiment.window,
                hamiltonian=hamiltonian,
                n=self.n,
                L=experiment.L,
                points_per_eps=experiment.points_per_eps,
                lipschitz_bound=self.lipschitz_bound,
                method=solver.epsilon_method,
                safety=solver.safety,
                theta_pad=solver.theta_pad,
                executor=executor,
                scenario={"name": self.config.scenario.name, "initial": self.config.initial.kind.value},
            )
        finally:
            if executor is not None:
                executor.shutdown()
        if report.fit is not None:
            print(f"fitted exponent {report.fit.exponent:.4f}")
        if report.note:
            print(f"note: {report.note}")
        update(90, "Writing report...")
        return emit_report(report, self.out, config=self.config.model_dump(mode="json"))

    def run_cone(self, update: Callable[[int, str], None]) -> List[Path]:
        solver, experiment = self.config.solver, self.config.experiment
        executor = self._executor()
        try:
            update(10, f"Running {experiment.cone_variant.value} cone example...")
            if experiment.cone_variant == ConeVariant.CURVATURE:
                report = cone_experiment(
                    experiment.eps_list,
                    experiment.resolutions,
                    n=self.n,
                    extent=experiment.cone_extent,
                    L=experiment.L,
                    points_per_eps=experiment.points_per_eps,
                    method=solver.epsilon_method,
                    safety=solver.safety,
                    executor=executor,
                )
            else:
                report = forced_cone_experiment(
                    experiment.eps_list,
                    L=experiment.L,
                    points_per_eps=experiment.points_per_eps,
                    method=solver.epsilon_method,
                    safety=solver.safety,
                    executor=executor,
                )
        finally:
            if executor is not None:
                executor.shutdown()
        if report.expander_constant is not None:
            print(f"expander constant w(0,1) = {report.expander_constant:.8f}")
        if report.fit is not None:
            print(f"fitted exponent {report.fit.exponent:.4f}")
        update(90, "Writing report...")
        return emit_report(report, self.out, config=self.config.model_dump(mode="json"))

    def run_monitors(self, update: Callable[[int, str], None]) -> List[Path]:
        solver = self.config.solver
        update(10, "Running monitored evolution...")
        estimates = apriori_monitor_suite(
            self.flow_force(),
            self.initial(),
            solver.horizon,
            lipschitz_bound=self.lipschitz_bound,
            gradient_bound=solver.gradient_bound,
            safety=solver.safety,
        )
        print(f"M_emp = {estimates.M_emp:.6g}, C1_proxy = {estimates.C1_proxy:.4g}, T* = {estimates.T_star:.4g}")
        return [_write_json(self.out / "monitors.json", estimates.model_dump(mode="json"))]

    # Entry point

    async def run(
        self,
        command: str,
        progress_callback: Optional[Callable[[int, str], None]] = None,
    ) -> List[Path]:
        """
        Execute one command.

        Args:
            command: One of COMMANDS
            progress_callback: Callback function(progress_percent, step_name)

        Returns:
            Paths of the files written below `out`
        """
        if command not in COMMANDS:
            raise InvalidArgumentError(f"unknown command '{command}', expected one of {', '.join(COMMANDS)}")

        self.current_job = ExperimentJob(
            job_id=str(uuid.uuid4())[:8],
            command=command,
            status=JobStatus.PROCESSING,
        )

        def update_progress(progress: int, step: str):
            if self.current_job:
                self.current_job.progress = progress
                self.current_job.current_step = step
            if progress_callback:
                progress_callback(progress, step)
            print(f"[{progress}%] {step}")

        try:
            self.out.mkdir(parents=True, exist_ok=True)
            handler = getattr(self, f"run_{command}")
            outputs = await asyncio.to_thread(handler, update_progress)

            self.current_job.outputs = [str(p) for p in outputs]
            update_progress(100, f"{command} complete!")
            self.current_job.status = JobStatus.COMPLETED
            return outputs

        except Exception as e:
            if self.current_job:
                self.current_job.status = JobStatus.FAILED
                self.current_job.error = str(e)
            raise

    def get_job_status(self) -> Optional[ExperimentJob]:
        """Get current job status"""
        return self.current_job
