import numpy as np
from scipy.integrate import solve_ivp, quad
ns=10; n=ns-1; ds=1/ns; s=np.arange(1,ns)*ds; a=s*s-s; tau=np.pi/2
P=lambda x: x**3/3-2*x**5/5
f1=lambda t: -a*np.sin(t)-2*np.cos(t)+a*a*np.cos(2*t)
f2=lambda t: -a*a*np.sin(2*t)-2*a*np.sin(t)-0.5*a*a*(P(np.sin(t))-P(-np.cos(t)))
L=(np.diag(-2*np.ones(n))+np.diag(np.ones(n-1),1)+np.diag(np.ones(n-1),-1))/ds**2
def run(delta):
    psi=lambda t: a*np.cos(t)+delta; phi=lambda t: a*np.sin(t)+delta
    k1=lambda th,y,z: 2*y*z
    k2=lambda th,y,z: np.sin(th)*np.cos(2*th)*y*z
    # initial integrals at t=0
    P0=np.array([quad(lambda th: k1(th,psi(th)[i],phi(th)[i]),-tau,0,epsabs=1e-14,epsrel=1e-14)[0] for i in range(n)])
    Q0=np.array([quad(lambda th: k2(th,psi(th)[i],phi(th)[i]),-tau,0,epsabs=1e-14,epsrel=1e-14)[0] for i in range(n)])
    segs=[]
    def yz(t):
        if t<=0: return psi(t),phi(t)
        for (t0,t1,sol) in segs:
            if t0-1e-14<=t<=t1+1e-14:
                x=sol(t); y=x[:n]; Q=x[2*n:]
                return y, -(0.5*Q+f2(t))/(2*(y+1))
        raise RuntimeError(t)
    def rhs(t,x):
        y=x[:n]; Pv=x[n:2*n]; Q=x[2*n:]
        z=-(0.5*Q+f2(t))/(2*(y+1))
        yd,zd=yz(t-tau)
        return np.concatenate([L@y+Pv+f1(t), k1(t,y,z)-k1(t-tau,yd,zd), k2(t,y,z)-k2(t-tau,yd,zd)])
    x0=np.concatenate([psi(0),P0,Q0]); t0=0
    out={}
    for k in range(5):
        t1=t0+tau
        sol=solve_ivp(rhs,(t0,t1),x0,method='Radau',rtol=1e-12,atol=1e-16,dense_output=True)
        segs.append((t0,t1,sol.sol)); x0=sol.y[:,-1]; t0=t1
    return yz
nom=run(0.0); per=run(0.5)
for t in [np.pi/2,3*np.pi/2,5*np.pi/2]:
    yn,zn=nom(t); yp,zp=per(t)
    print(f"t={t:.4f} E={np.max(abs(yn-yp)):.4e} EA={np.max(abs(zn-zp)):.4e}  nominal err={np.max(abs(yn-a*np.cos(t))):.2e}")
