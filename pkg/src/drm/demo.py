"""
Scripted DRM demo scenarios.

Each scenario builds the demo world (one user, one content item), runs the
issuance protocol and then whatever the scenario adds: plays at `now`, a
renewal, a usage report. The narrative never includes key or ciphertext
bytes, so with a fixed seed and `now` it is identical run to run.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Union

from constants.drms import (
    DEMO_CONTENT_CONFIG, DEMO_USER_CONFIG, PROTOCOL_STEPS, RENEWAL_EXTENSION,
    get_available_scenarios, get_scenario_config,
)
from constants.kinds import DEFAULT_SEED
from drm.crypto import CryptoSuite, ProductionSuite
from drm.errors import Denial
from drm.reader import ReaderState
from drm.rules import ContentItem, DeviceClass, UsageRules, UserProfile
from drm.service import DrmService
from sysdesc.tree import dumps_inline
from utils.decimals import format_micro


logger = logging.getLogger(__name__)


@dataclass
class DemoWorld:
    service: DrmService
    reader: ReaderState
    user: UserProfile
    content_id: str


def build_demo_world(
    suite: Optional[CryptoSuite] = None,
    seed: int = DEFAULT_SEED,
    data_dir: Optional[Union[str, Path]] = None,
) -> DemoWorld:
    """A service with the demo user registered and the demo content submitted."""
    service = DrmService(suite, seed, data_dir)
    user = UserProfile(DEMO_USER_CONFIG["user_id"], {
        "name": DEMO_USER_CONFIG["name"],
        "device_class": DEMO_USER_CONFIG["device_class"],
    })
    reader = service.register_user(user)

    item = ContentItem(
        DEMO_CONTENT_CONFIG["content_id"],
        DEMO_CONTENT_CONFIG["plaintext"],
        {DeviceClass(name): data for name, data in DEMO_CONTENT_CONFIG["renditions"].items()},
    )
    service.submit_content(item, UsageRules.from_tree(DEMO_CONTENT_CONFIG["rules"]))
    return DemoWorld(service, reader, user, item.content_id)


@dataclass
class DemoResult:
    scenario: str
    lines: List[str] = field(default_factory=list)
    denial: Optional[Denial] = None

    @property
    def verdict(self) -> str:
        return "ok" if self.denial is None else f"denied:{self.denial.reason}"

    @property
    def ok(self) -> bool:
        return self.denial is None

    def say(self, line: str):
        self.lines.append(line)


def run_demo(
    scenario: str,
    now: int = 0,
    suite: Optional[CryptoSuite] = None,
    seed: int = DEFAULT_SEED,
) -> DemoResult:
    """
    Run one scripted scenario end to end.

    Args:
        scenario: issue, consume, renew or report
        now: Timestamp used for every play and for the renewal
        suite: Crypto suite (production when None)
        seed: World and engine seed

    Returns:
        DemoResult with the narrative lines and the denial that ended it, if any

    Raises:
        ValueError: If the scenario is unknown
    """
    config = get_scenario_config(scenario)
    if config is None:
        raise ValueError(f"unknown scenario {scenario!r} (expected one of {', '.join(get_available_scenarios())})")

    world = build_demo_world(suite or ProductionSuite(), seed)
    service = world.service
    result = DemoResult(scenario.lower())
    result.say(f"scenario {result.scenario}: {config['description']}")

    issuance = service.run_issuance_protocol(world.user, world.content_id)
    transfers = issuance.trace.transfers([tag for tag, _ in PROTOCOL_STEPS])
    for number, ((_, text), event) in enumerate(zip(PROTOCOL_STEPS, transfers), start=1):
        result.say(f"step {number} t={format_micro(event.time)} "
                   f"{event.detail['from'][0]} -> {event.detail['to'][0]}: {text}")
    license = issuance.license
    result.say(f"license {license.license_id} for {license.user_id}/{license.content_id} "
               f"rules {dumps_inline(license.rules.to_tree())}")

    if config["renew"]:
        expires_at = max(now, license.rules.expires_at or 0) + RENEWAL_EXTENSION
        renewed = service.renew_license(license, license.rules.with_expiry(expires_at))
        result.say(f"renewed {license.license_id} as {renewed.license_id} expires_at {expires_at}")
        try:
            service.consume(world.reader, license, issuance.ciphertext, now)
            result.say(f"old license {license.license_id} still plays")
        except Denial as denial:
            result.say(f"old license {license.license_id} at now={now}: denied {denial.reason}")
        license = renewed

    for play in range(1, config["plays"] + 1):
        try:
            plaintext = service.consume(world.reader, license, issuance.ciphertext, now)
        except Denial as denial:
            result.say(f"play {play} at now={now}: denied {denial.reason}")
            if not config["report"]:
                result.denial = denial
                break
        else:
            result.say(f"play {play} at now={now}: ok, {len(plaintext)} bytes, "
                       f"{world.reader.plays(license)} play(s) used")

    if config["report"]:
        report = service.usage_report(world.content_id)
        denials = ", ".join(f"{reason}={count}" for reason, count in sorted(report.denials.items()))
        result.say(f"report {report.content_id}: downloads={report.downloads} "
                   f"consumptions={report.consumptions} denials={denials or 'none'}")

    logger.info("demo %s finished: %s", result.scenario, result.verdict)
    return result
