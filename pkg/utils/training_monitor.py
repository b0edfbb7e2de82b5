"""
Training monitor for UMDQN runs
Tracks step timing, losses, episode returns and process resources
"""
import logging
import os
import time
from collections import deque
from dataclasses import dataclass
from datetime import datetime
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import psutil

logger = logging.getLogger(__name__)


@dataclass
class ResourceMetrics:
    """Process-level resource usage"""
    cpu_percent: float = 0.0
    rss_megabytes: float = 0.0
    system_memory_percent: float = 0.0
    uptime_seconds: float = 0.0


@dataclass
class LearningMetrics:
    """Counters of the learning loop"""
    env_steps: int = 0
    learn_steps: int = 0
    skipped_learn_steps: int = 0
    aborted_learn_steps: int = 0
    episodes: int = 0
    target_updates: int = 0
    checkpoints: int = 0


class TrainingMonitor:
    """
    Rolling metrics of a training run
    """

    def __init__(self, max_history: int = 1000):
        """
        Initialize the monitor

        Args:
            max_history: Maximum number of historical data points to keep
        """
        self.max_history = max_history
        self.start_time = datetime.now()
        self._process = psutil.Process(os.getpid())
        self._process.cpu_percent(interval=None)

        self.step_times: deque = deque(maxlen=max_history)
        self.losses: deque = deque(maxlen=max_history)
        self.episode_returns: deque = deque(maxlen=max_history)
        self.error_log: deque = deque(maxlen=100)

        self.learning = LearningMetrics()
        self.resources = ResourceMetrics()
        self._step_started: Optional[float] = None

        logger.info("Training monitor initialized")

    def record_step_start(self) -> None:
        self._step_started = time.perf_counter()

    def record_step_end(self, loss: Optional[float] = None) -> None:
        """
        Record the end of an environment step

        Args:
            loss: Training loss of the learning step run at this step, if any
        """
        if self._step_started is not None:
            self.step_times.append(time.perf_counter() - self._step_started)
            self._step_started = None
        self.learning.env_steps += 1
        if loss is None:
            return
        self.learning.learn_steps += 1
        self.losses.append(loss)

    def record_skipped_learning(self) -> None:
        self.learning.skipped_learn_steps += 1

    def record_episode(self, episode_return: float) -> None:
        self.learning.episodes += 1
        self.episode_returns.append(episode_return)

    def record_target_update(self) -> None:
        self.learning.target_updates += 1

    def record_checkpoint(self) -> None:
        self.learning.checkpoints += 1

    def record_error(self, where: str, error: str) -> None:
        """
        Record an error

        Args:
            where: Component that failed
            error: Error message
        """
        self.learning.aborted_learn_steps += 1
        self.error_log.append({
            'timestamp': datetime.now(),
            'where': where,
            'error': error
        })
        logger.error(f"Error recorded in {where}: {error}")

    def get_resource_metrics(self) -> ResourceMetrics:
        with self._process.oneshot():
            self.resources.cpu_percent = self._process.cpu_percent(interval=None)
            self.resources.rss_megabytes = self._process.memory_info().rss / (1024 * 1024)
        self.resources.system_memory_percent = psutil.virtual_memory().percent
        self.resources.uptime_seconds = (datetime.now() - self.start_time).total_seconds()
        return self.resources

    def get_recent_errors(self, limit: int = 10) -> List[Dict[str, Any]]:
        return list(self.error_log)[-limit:]

    def get_performance_stats(self) -> Dict[str, Any]:
        """
        Step timing and loss statistics over the retained history
        """
        stats: Dict[str, Any] = {
            'env_steps': self.learning.env_steps,
            'learn_steps': self.learning.learn_steps,
            'episodes': self.learning.episodes,
        }
        if self.step_times:
            times = np.asarray(self.step_times)
            stats.update({
                'mean_step_time': float(times.mean()),
                'p50_step_time': float(np.percentile(times, 50)),
                'p95_step_time': float(np.percentile(times, 95)),
                'steps_per_second': float(1.0 / times.mean()) if times.mean() > 0 else 0.0,
            })
        if self.losses:
            stats['recent_loss_mean'] = float(np.mean(self.losses))
        if self.episode_returns:
            stats['recent_return_mean'] = float(np.mean(self.episode_returns))
        return stats

    def get_health_status(self) -> Tuple[str, Dict[str, Any]]:
        """
        'healthy', 'degraded' or 'unhealthy' from resource usage and aborted steps
        """
        resources = self.get_resource_metrics()
        issues = []
        status = 'healthy'

        if resources.system_memory_percent > 90:
            issues.append('High memory usage')
            status = 'degraded'

        attempted = self.learning.learn_steps + self.learning.aborted_learn_steps
        if attempted > 0:
            abort_rate = self.learning.aborted_learn_steps / attempted * 100
            if abort_rate > 1:
                issues.append(f'Aborted learning steps: {abort_rate:.1f}%')
                status = 'unhealthy' if abort_rate > 10 else 'degraded'

        return status, {'status': status, 'issues': issues}

    def export_metrics(self) -> Dict[str, Any]:
        """
        Snapshot written into the run manifest
        """
        resources = self.get_resource_metrics()
        return {
            'timestamp': datetime.now().isoformat(),
            'resources': {
                'cpu_percent': resources.cpu_percent,
                'rss_megabytes': resources.rss_megabytes,
                'system_memory_percent': resources.system_memory_percent,
                'wall_time_seconds': resources.uptime_seconds,
            },
            'learning': {
                'env_steps': self.learning.env_steps,
                'learn_steps': self.learning.learn_steps,
                'skipped_learn_steps': self.learning.skipped_learn_steps,
                'aborted_learn_steps': self.learning.aborted_learn_steps,
                'episodes': self.learning.episodes,
                'target_updates': self.learning.target_updates,
                'checkpoints': self.learning.checkpoints,
            },
            'performance_stats': self.get_performance_stats(),
            'health_status': self.get_health_status()[1],
        }
