"""Command line interface.

Machine-readable results go to stdout; progress and diagnostics go to
stderr, so output can be piped. Every command exits 0 on success, 1 on a
pipeline error (message on stderr), 2 on usage errors.
"""

from __future__ import annotations

import dataclasses
import functools
import logging
import sys
from pathlib import Path

import click

from . import minitoml
from .cache import ScreenplayCache
from .config import Config, dump_config, load_config
from .errors import ConfigError, ScreenwrightError
from .harness import load_dataset, render_table, run_eval
from .parsing import canonical_json
from .perception import perceive
from .qa import Question, answer_breakpoint, answer_global
from .screenplay import Screenplay, build_screenplay, screenplay_digest, serialize
from .providers import make_clients

log = logging.getLogger("screenwright")


def _load(ctx: click.Context) -> Config:
    params = ctx.obj
    try:
        overrides = {}
        for item in params["set"]:
            dotted, sep, value = item.partition("=")
            if not sep or not dotted:
                raise ConfigError(f"--set {item!r}: expected option=value")
            try:
                overrides[dotted] = minitoml.loads(f"v = {value}")["v"]
            except minitoml.MiniTomlError:
                overrides[dotted] = value
        return load_config(
            params["config_path"], offline=params["offline"], overrides=overrides
        )
    except ConfigError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


def _pipeline_errors(command):
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except ScreenwrightError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)

    return wrapper


def _ensure_screenplay(
    config: Config, source: str, *, force: bool = False
) -> tuple[Screenplay, bool]:
    """Fetch from cache or build and store. Returns (screenplay, was_cached)."""
    from .media import pick_adapter, probe
    from .templates import TemplateSet

    templates = TemplateSet.load()
    cache = ScreenplayCache(config.cache.directory) if config.cache.enabled else None
    profile = config.providers
    if cache is not None and not force:
        info = probe(source, pick_adapter(source))
        hit = cache.get(info.content_hash, profile.digest(), templates.versions())
        if hit is not None:
            return hit, True
    pipeline = config.pipeline
    bundle = perceive(
        source, profile, templates=templates, stat_rate=pipeline.stat_rate,
        bins=pipeline.histogram_bins, cut_threshold=pipeline.cut_threshold,
        caption_interval=pipeline.caption_interval,
    )
    screenplay = build_screenplay(
        bundle, profile, templates=templates,
        gap_threshold=pipeline.gap_threshold,
        separator_token=pipeline.separator_token,
        summary_budget=pipeline.summary_budget,
        merge_scenes=pipeline.merge_scenes,
    )
    if cache is not None:
        cache.put(screenplay)
    return screenplay, False


@click.group()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="Config file (TOML). Defaults are used without one.")
@click.option("--offline", is_flag=True, help="Force every provider onto the mock backend.")
@click.option("--set", "set_", multiple=True, metavar="OPTION=VALUE",
              help="Override a config option, e.g. --set pipeline.cut_threshold=0.5")
@click.option("--verbose", is_flag=True, help="Log progress to stderr.")
@click.pass_context
def main(ctx: click.Context, config_path, offline, set_, verbose):
    """Turn videos into scene-level screenplays and question them."""
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    ctx.obj = {"config_path": config_path, "offline": offline, "set": list(set_)}


@main.command()
@click.argument("video", type=click.Path(exists=True, dir_okay=False))
@click.option("--force", is_flag=True, help="Rebuild even if cached.")
@click.option("--json", "as_json", is_flag=True, help="Print the full document.")
@click.pass_context
@_pipeline_errors
def ingest(ctx, video, force, as_json):
    """Build (or fetch) the screenplay for VIDEO and cache it."""
    config = _load(ctx)
    screenplay, cached = _ensure_screenplay(config, video, force=force)
    click.echo("cache hit" if cached else "built", err=True)
    if as_json:
        click.echo(serialize(screenplay).decode("utf-8"))
    else:
        click.echo(screenplay_digest(screenplay, include_creation_time=False))


@main.command()
@click.argument("video", type=click.Path(exists=True, dir_okay=False))
@click.argument("question")
@click.option("--at", "timestamp", type=float, default=None,
              help="Ask about this moment (seconds) instead of the whole video.")
@click.option("--no-look-back", is_flag=True,
              help="Never re-open the video for a weak breakpoint answer.")
@click.option("--json", "as_json", is_flag=True, help="Print the full answer record.")
@click.pass_context
@_pipeline_errors
def ask(ctx, video, question, timestamp, no_look_back, as_json):
    """Answer QUESTION about VIDEO from its screenplay."""
    config = _load(ctx)
    screenplay, cached = _ensure_screenplay(config, video)
    click.echo("screenplay from cache" if cached else "screenplay built", err=True)
    qa = config.qa
    if timestamp is None:
        from .templates import TemplateSet

        answer = answer_global(
            screenplay,
            Question(text=question, mode="global"),
            make_clients(config.providers)["reasoner"],
            TemplateSet.load(),
            qa.negative_keywords,
        )
    else:
        answer = answer_breakpoint(
            screenplay, video,
            Question(text=question, mode="breakpoint", timestamp=timestamp),
            config.providers,
            radius=qa.window_radius,
            window=qa.look_back_window,
            count=qa.look_back_count,
            keywords=qa.negative_keywords,
            allow_look_back=qa.look_back and not no_look_back,
            look_back_mode=qa.look_back_mode,
        )
    if as_json:
        record = {
            "text": answer.text,
            "mode": answer.question.mode,
            "timestamp": answer.question.timestamp,
            "verdict": answer.validity.verdict,
            "matched_keyword": answer.validity.matched_keyword,
            "provenance": answer.provenance,
            "look_back_frames": len(answer.look_back_frames),
        }
        click.echo(canonical_json(record))
    else:
        click.echo(answer.text)


@main.command()
@click.argument("manifest", type=click.Path(exists=True, dir_okay=False))
@click.option("--ssgm", type=click.Choice(["on", "off"]), default="on",
              help="Scene merging; off keeps one scene per shot.")
@click.option("--lbdm", type=click.Choice(["on", "off"]), default="on",
              help="Breakpoint look-back fallback.")
@click.option("--json", "as_json", is_flag=True, help="Print the full report.")
@click.pass_context
@_pipeline_errors
def eval(ctx, manifest, ssgm, lbdm, as_json):
    """Run the QA dataset in MANIFEST and grade the answers."""
    config = _load(ctx)
    items = load_dataset(manifest)
    base = Path(manifest).parent
    resolved = [
        item if Path(item.video).is_absolute()
        else dataclasses.replace(item, video=str(base / item.video))
        for item in items
    ]
    pipeline, qa = config.pipeline, config.qa
    report = run_eval(
        resolved, config.providers,
        ssgm_on=ssgm == "on", lbdm_on=lbdm == "on",
        stat_rate=pipeline.stat_rate, bins=pipeline.histogram_bins,
        cut_threshold=pipeline.cut_threshold,
        caption_interval=pipeline.caption_interval,
        gap_threshold=pipeline.gap_threshold,
        separator_token=pipeline.separator_token,
        summary_budget=pipeline.summary_budget,
        radius=qa.window_radius, window=qa.look_back_window,
        count=qa.look_back_count, keywords=qa.negative_keywords,
    )
    failed = [r for r in report.results if r.error is not None]
    for result in failed:
        click.echo(f"item {result.item.item_id}: {result.error}", err=True)
    if as_json:
        record = report.to_dict()
        record["digest"] = report.digest()
        click.echo(canonical_json(record))
    else:
        click.echo(render_table([report]))


@main.group()
def cache():
    """Inspect or empty the screenplay cache."""


@cache.command("ls")
@click.pass_context
@_pipeline_errors
def cache_ls(ctx):
    """List cached screenplay keys."""
    config = _load(ctx)
    for key in ScreenplayCache(config.cache.directory).entries():
        click.echo(key)


@cache.command("clear")
@click.pass_context
@_pipeline_errors
def cache_clear(ctx):
    """Delete every cached screenplay."""
    config = _load(ctx)
    removed = ScreenplayCache(config.cache.directory).clear()
    click.echo(str(removed))


@main.command("config")
@click.option("--json", "as_json", is_flag=True, help="Print JSON instead of TOML.")
@click.pass_context
@_pipeline_errors
def config_show(ctx, as_json):
    """Print the effective configuration and its digest."""
    config = _load(ctx)
    if as_json:
        record = config.to_dict()
        record["digest"] = config.digest()
        click.echo(canonical_json(record))
    else:
        click.echo(dump_config(config), nl=False)
        click.echo(f"# digest: {config.digest()}")


if __name__ == "__main__":
    main()
