from django.db import models
from django.utils import timezone


class PipelineRun(models.Model):
    """One invocation of a pipeline command"""

    KIND_CHOICES = [
        ('ingest', 'Ingest'),
        ('train', 'Train'),
        ('eval', 'Evaluate'),
        ('baseline', 'Baseline comparison'),
    ]

    STATUS_CHOICES = [
        ('pending', 'Pending'),
        ('running', 'Running'),
        ('completed', 'Completed'),
        ('failed', 'Failed'),
    ]

    ERROR_TYPE_CHOICES = [
        ('Input', 'Input Error'),
        ('Graph', 'Graph Error'),
        ('Sampling', 'Sampling Error'),
        ('Model', 'Model Error'),
        ('Evaluation', 'Evaluation Error'),
        ('System', 'System Error'),
    ]

    kind = models.CharField(max_length=16, choices=KIND_CHOICES)
    predicate = models.CharField(max_length=255, blank=True)
    arguments = models.JSONField(default=dict, blank=True)
    status = models.CharField(max_length=32, choices=STATUS_CHOICES, default='pending')

    summary = models.JSONField(default=dict, blank=True)
    error_type = models.CharField(max_length=32, choices=ERROR_TYPE_CHOICES, blank=True)
    error_message = models.TextField(blank=True)

    created_at = models.DateTimeField(auto_now_add=True)
    started_at = models.DateTimeField(null=True, blank=True)
    completed_at = models.DateTimeField(null=True, blank=True)

    class Meta:
        ordering = ('-created_at',)

    def __str__(self):
        target = f" {self.predicate}" if self.predicate else ""
        return f"{self.kind}{target} - {self.status}"

    @classmethod
    def start(cls, kind, predicate='', arguments=None):
        return cls.objects.create(
            kind=kind,
            predicate=predicate or '',
            arguments=arguments or {},
            status='running',
            started_at=timezone.now(),
        )

    def mark_completed(self, summary=None):
        self.status = 'completed'
        self.summary = summary or {}
        self.completed_at = timezone.now()
        self.save(update_fields=['status', 'summary', 'completed_at'])

    def mark_failed(self, error_type, message):
        self.status = 'failed'
        self.error_type = error_type
        self.error_message = message
        self.completed_at = timezone.now()
        self.save(update_fields=['status', 'error_type', 'error_message', 'completed_at'])
