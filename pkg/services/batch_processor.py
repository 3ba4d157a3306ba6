"""
Batch processing service for running independent jobs
Thread-pool execution with job tracking and results in submission order
"""

import logging
import os
import time
import itertools
import threading
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, List, Sequence

logger = logging.getLogger(__name__)


class BatchProcessor:
    """Service for running many independent computations concurrently"""

    def __init__(self, max_workers: int = None):
        self.max_workers = max_workers or int(os.getenv('ATOMFRAME_MAX_WORKERS', 4))
        self.active_jobs = {}  # Track batch jobs by id
        self._ids = itertools.count(1)
        self._lock = threading.Lock()

    def run_batch(self, name: str, func: Callable[[Any], Any], items: Sequence[Any]) -> Dict[str, Any]:
        """
        Apply func to every item on a thread pool

        Args:
            name (str): Label used in logs and job summaries
            func (Callable): Work function taking one item
            items (Sequence): Work items

        Returns:
            Dict with the job id, per-item results in submission order and
            the per-item errors
        """
        job_id = next(self._ids)
        with self._lock:
            self.active_jobs[job_id] = {
                'name': name,
                'start_time': time.time(),
                'status': 'processing',
                'total_items': len(items),
                'processed_items': 0,
                'failed_items': 0
            }
        logger.info(f"Started batch job {job_id} ({name}) with {len(items)} items")

        results: List[Any] = [None] * len(items)
        errors: List[Dict[str, Any]] = []
        try:
            with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
                futures = [executor.submit(func, item) for item in items]
                for index, future in enumerate(futures):
                    try:
                        results[index] = future.result()
                        self._advance(job_id, failed=False)
                    except Exception as e:
                        logger.error(f"Error processing item {index} of batch job {job_id}: {str(e)}")
                        errors.append({'index': index, 'error': str(e)})
                        self._advance(job_id, failed=True)

            status = 'completed' if not errors else 'failed'
            self._finish(job_id, status)
            logger.info(f"Batch job {job_id} {status}: {len(items) - len(errors)} successful, {len(errors)} failed")
            return {'success': not errors, 'job_id': job_id, 'results': results, 'errors': errors}

        except Exception as e:
            logger.error(f"Error in batch job {job_id}: {str(e)}")
            self._finish(job_id, 'failed')
            return {'success': False, 'job_id': job_id, 'results': results, 'errors': errors, 'error': str(e)}

    def _advance(self, job_id: int, failed: bool):
        with self._lock:
            job = self.active_jobs[job_id]
            job['failed_items' if failed else 'processed_items'] += 1

    def _finish(self, job_id: int, status: str):
        with self._lock:
            job = self.active_jobs[job_id]
            job['status'] = status
            job['runtime_seconds'] = time.time() - job['start_time']

    def get_job_status(self, job_id: int) -> Dict[str, Any]:
        """
        Get status of a batch job

        Args:
            job_id (int): ID of the batch job

        Returns:
            Dict containing job status information
        """
        with self._lock:
            job = self.active_jobs.get(job_id)
            if not job:
                return {'error': 'Batch job not found'}
            status = dict(job)
        total = status['total_items']
        done = status['processed_items'] + status['failed_items']
        status['job_id'] = job_id
        status['progress_percentage'] = (done / total * 100) if total > 0 else 100.0
        return status

    def cleanup_completed_jobs(self, max_age_hours: float = 24):
        """
        Clean up tracking data for old finished jobs

        Args:
            max_age_hours (float): Maximum age in hours for keeping job data
        """
        current_time = time.time()
        with self._lock:
            jobs_to_remove = [
                job_id for job_id, job in self.active_jobs.items()
                if (current_time - job['start_time']) / 3600 >= max_age_hours
                and job['status'] in ('completed', 'failed')
            ]
            for job_id in jobs_to_remove:
                del self.active_jobs[job_id]
                logger.debug(f"Cleaned up tracking data for job {job_id}")

    def get_active_jobs_summary(self) -> Dict[str, Any]:
        """Get summary of all tracked jobs"""
        with self._lock:
            jobs = list(self.active_jobs.items())
        summary = {'total_jobs': len(jobs), 'jobs_by_status': {}, 'jobs': []}
        for job_id, job in jobs:
            summary['jobs_by_status'][job['status']] = summary['jobs_by_status'].get(job['status'], 0) + 1
            summary['jobs'].append({'job_id': job_id, 'name': job['name'], 'status': job['status']})
        return summary
