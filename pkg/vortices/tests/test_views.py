import tempfile
from pathlib import Path

from django.contrib.auth import get_user_model
from django.test import TestCase
from django.urls import reverse

from vortices.models import SimulationRun
from vortices.runner import run_from_dict

SIMULATION = {
    'mode': 'euler',
    'output_dir': 'disk',
    't_end': 3.0,
    'patch': {'shape': 'uniform_disk', 'radius': 0.5, 'omega_level': 1.0, 'n_blobs': 30},
    'step': {'dt': 0.1},
    'schedule': {'kind': 'linear', 'dt_out': 0.5},
}


class RunViewTests(TestCase):

    @classmethod
    def setUpTestData(cls):
        cls.staff = get_user_model().objects.create_user('staff', password='pw', is_staff=True)

    def setUp(self):
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        self.root = Path(tmp.name)
        self.outcome = run_from_dict(SIMULATION, root=self.root)
        self.run = SimulationRun.objects.get()
        self.client.force_login(self.staff)

    def test_requires_staff(self):
        self.client.logout()
        response = self.client.get(reverse('vortices:run_list'))
        self.assertEqual(response.status_code, 302)

    def test_run_list_filters(self):
        SimulationRun.objects.create(mode='ns', output_dir=str(self.root / 'other'))
        runs = self.client.get(reverse('vortices:run_list')).json()
        self.assertEqual(len(runs), 2)
        runs = self.client.get(reverse('vortices:run_list'), {'mode': 'euler'}).json()
        self.assertEqual([r['id'] for r in runs], [self.run.pk])
        self.assertEqual(runs[0]['status'], 'complete')
        runs = self.client.get(reverse('vortices:run_list'), {'status': 'running'}).json()
        self.assertEqual([r['mode'] for r in runs], ['ns'])

    def test_manifest(self):
        response = self.client.get(reverse('vortices:run_manifest', args=[self.run.pk]))
        self.assertEqual(response.status_code, 200)
        self.assertEqual(response.json()['manifest']['config']['t_end'], 3.0)

    def test_manifest_missing(self):
        other = SimulationRun.objects.create(mode='ns', output_dir=str(self.root / 'other'),
                                             manifest_path=str(self.root / 'other' / 'manifest.json'))
        response = self.client.get(reverse('vortices:run_manifest', args=[other.pk]))
        self.assertEqual(response.status_code, 404)
        response = self.client.get(reverse('vortices:run_manifest', args=[other.pk + 100]))
        self.assertEqual(response.status_code, 404)

    def test_csv_export(self):
        response = self.client.get(reverse('vortices:export_diagnostics_csv', args=[self.run.pk, 0]))
        self.assertEqual(response.status_code, 200)
        self.assertEqual(response['Content-Type'], 'text/csv')
        self.assertIn('attachment; filename="diagnostics_run', response['Content-Disposition'])
        lines = response.content.decode().strip().splitlines()
        self.assertTrue(lines[0].startswith('time,total_mass,diameter'))
        self.assertEqual(len(lines), 8)

    def test_csv_export_unknown_seed(self):
        response = self.client.get(reverse('vortices:export_diagnostics_csv', args=[self.run.pk, 9]))
        self.assertEqual(response.status_code, 404)

    def test_report(self):
        response = self.client.get(reverse('vortices:run_report', args=[self.run.pk]),
                                   {'kind': 'euler_cuberoot_log', 'alpha': 2, 'ell': 1})
        self.assertEqual(response.status_code, 200)
        self.assertEqual([s['time'] for s in response.json()['samples']], [1.5, 2.0, 2.5, 3.0])

    def test_report_rejects_bad_envelope(self):
        response = self.client.get(reverse('vortices:run_report', args=[self.run.pk]),
                                   {'kind': 'ns_power', 'beta': 1, 'delta': 2})
        self.assertEqual(response.status_code, 400)
        self.assertIn('delta', response.json()['errors'])
