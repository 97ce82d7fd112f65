"""
Views for the Vortices app.

Staff-only JSON and CSV endpoints over the run registry:
- Run list and run manifest
- Diagnostics CSV export per seed
- Confinement report computed on demand
"""

import csv

from django.contrib.admin.views.decorators import staff_member_required
from django.http import Http404, HttpResponse, JsonResponse
from django.shortcuts import get_object_or_404
from django.utils import timezone

from .confinement import build_report
from .exceptions import InputError, NumericalError
from .forms import EnvelopeForm
from .models import SimulationRun
from .runner import describe, load_run_records, seed_dir
from .serializers import DIAGNOSTICS_NAME, ensemble_mean_records, read_json


def _run_summary(run):
    return {
        'id': run.pk,
        'mode': run.mode,
        'status': run.status,
        'exit_code': run.exit_code,
        'output_dir': run.output_dir,
        'created_at': run.created_at.isoformat(),
        'finished_at': run.finished_at.isoformat() if run.finished_at else None,
    }


@staff_member_required
def run_list(request):
    """All registered runs, newest first; filter with ?mode= and ?status=."""
    runs = SimulationRun.objects.all()
    if mode := request.GET.get('mode'):
        runs = runs.filter(mode=mode)
    if status := request.GET.get('status'):
        runs = runs.filter(status=status)
    return JsonResponse([_run_summary(run) for run in runs], safe=False)


@staff_member_required
def run_manifest(request, run_id):
    """The manifest written by the runner for this run."""
    run = get_object_or_404(SimulationRun, pk=run_id)
    try:
        manifest = read_json(run.manifest_path)
    except (OSError, ValueError):
        raise Http404('Manifest not available for this run.')
    return JsonResponse({'run': _run_summary(run), 'manifest': manifest})


@staff_member_required
def export_diagnostics_csv(request, run_id, seed):
    """
    Export the diagnostics of one seed as CSV.
    Rows are streamed from the run directory as written.
    """
    run = get_object_or_404(SimulationRun, pk=run_id)
    path = seed_dir(run.output_dir, seed) / DIAGNOSTICS_NAME
    try:
        with open(path, newline='') as fh:
            rows = list(csv.reader(fh))
    except OSError:
        raise Http404('No diagnostics recorded for this seed.')

    response = HttpResponse(content_type='text/csv')
    filename = f"diagnostics_run{run.pk}_seed{seed}_{timezone.now().strftime('%Y%m%d_%H%M%S')}.csv"
    response['Content-Disposition'] = f'attachment; filename="{filename}"'
    writer = csv.writer(response)
    writer.writerows(rows)
    return response


@staff_member_required
def run_report(request, run_id):
    """
    Confinement report for a simulation run, with the envelope taken from
    the query string (kind, alpha, beta, delta, ell).
    """
    run = get_object_or_404(SimulationRun, pk=run_id)
    form = EnvelopeForm(data=request.GET)
    if not form.is_valid():
        return JsonResponse({'errors': form.errors}, status=400)
    try:
        records = ensemble_mean_records(load_run_records(run.output_dir))
        report = build_report(records, form.cleaned_data['spec'], require_fit=False)
    except (InputError, NumericalError) as exc:
        return JsonResponse({'errors': {'__all__': [describe(exc)]}}, status=400)
    return JsonResponse(report.to_dict())
