import warnings
import numpy as np
from scipy.integrate import solve_ivp, quad
warnings.simplefilter("ignore")
tau=1.0
ue=lambda t: np.exp(-t)*np.array([np.cos(t),np.sin(t)])
ve=lambda t: np.exp(-t)*np.array([1-t,1+t])
due=lambda t: np.exp(-t)*np.array([-np.cos(t)-np.sin(t), np.cos(t)-np.sin(t)])
# kernel "inner" values: K1 = e^{th-t} k(th), k=(u2+v1, u1-v2); K2 = 0.25*(sin(t-th) w1, cos(t-th) w2), w=(u2-0.25v1, u1+0.25v2)
kf=lambda u,v: np.array([u[1]+v[0], u[0]-v[1]])
wf=lambda u,v: np.array([u[1]-0.25*v[0], u[0]+0.25*v[1]])
def init_int(u,v):
    P=np.array([quad(lambda th: np.exp(th)*kf(u(th),v(th))[i],-tau,0,epsabs=1e-15,epsrel=1e-14)[0] for i in range(2)])
    S=quad(lambda th: np.sin(-th)*wf(u(th),v(th))[0],-tau,0,epsabs=1e-15,epsrel=1e-14)[0]
    C=quad(lambda th: np.cos(-th)*wf(u(th),v(th))[1],-tau,0,epsabs=1e-15,epsrel=1e-14)[0]
    # also need cos-integral of w1 and sin-integral of w2 for the ODE closure
    C1=quad(lambda th: np.cos(-th)*wf(u(th),v(th))[0],-tau,0,epsabs=1e-15,epsrel=1e-14)[0]
    S2=quad(lambda th: np.sin(-th)*wf(u(th),v(th))[1],-tau,0,epsabs=1e-15,epsrel=1e-14)[0]
    return np.concatenate([P,[S,C1,C,S2]])
def int_rhs(t, I, k_now, k_del, w_now, w_del):
    P=I[:2]; S1,C1,C2,S2=I[2:]
    dP=-P+k_now-np.exp(-tau)*k_del
    # d/dt int sin(t-th)w = sin(0)w(t) - sin(tau) w(t-tau) + int cos(t-th) w
    dS1=-np.sin(tau)*w_del[0]+C1
    dC1=w_now[0]-np.cos(tau)*w_del[0]-S1
    dC2=w_now[1]-np.cos(tau)*w_del[1]-S2
    dS2=-np.sin(tau)*w_del[1]+C2
    return np.concatenate([dP,[dS1,dC1,dC2,dS2]])
def run(du,dv):
    psi=lambda t: ue(t)+du(t); phi=lambda t: ve(t)+dv(t)
    segs=[]
    def forc(t,Ie):
        u=ue(t); v=ve(t)
        f=due(t)-np.array([t*t*np.exp(-t)-50*u[0]+u[1]*Ie[0], 1+np.sin(t*t)-50*u[1]+u[0]*Ie[1]])
        g=v-np.array([-0.1*u[1]+0.25*Ie[2], 0.2*u[0]+0.25*Ie[4]])
        return f,g
    def vof(t,u,I,Ie):
        f,g=forc(t,Ie)
        return np.array([-0.1*u[1]+0.25*I[2]+g[0], 0.2*u[0]+0.25*I[4]+g[1]])
    def uv(t):
        if t<=0: return psi(t),phi(t)
        for (t0,t1,sol) in segs:
            if t0-1e-14<=t<=t1+1e-14:
                x=sol(t); u=x[:2]; I=x[2:8]; Ie=x[8:]
                return u, vof(t,u,I,Ie)
        raise RuntimeError
    def rhs(t,x):
        u=x[:2]; I=x[2:8]; Ie=x[8:]
        v=vof(t,u,I,Ie); f,g=forc(t,Ie)
        ud,vd=uv(t-tau)
        du_=np.array([t*t*np.exp(-t)-50*u[0]+u[1]*I[0], 1+np.sin(t*t)-50*u[1]+u[0]*I[1]])+f
        dI=int_rhs(t,I,kf(u,v),kf(ud,vd),wf(u,v),wf(ud,vd))
        dIe=int_rhs(t,Ie,kf(ue(t),ve(t)),kf(ue(t-tau),ve(t-tau)),wf(ue(t),ve(t)),wf(ue(t-tau),ve(t-tau)))
        return np.concatenate([du_,dI,dIe])
    x0=np.concatenate([psi(0),init_int(psi,phi),init_int(ue,ve)]); t0=0
    for k in range(10):
        sol=solve_ivp(rhs,(t0,t0+tau),x0,method='Radau',rtol=1e-12,atol=1e-18,dense_output=True)
        segs.append((t0,t0+tau,sol.sol)); x0=sol.y[:,-1]; t0+=tau
    return uv
zero=lambda t: np.zeros(2)
nom=run(zero,zero)
per=run(lambda t: 0.5*np.array([np.cos(t),np.sin(t)]), lambda t: np.array([.5,.5]))
for t in [0.5,1,2,5,10]:
    un,vn=nom(t); up,vp=per(t)
    print(f"t={t} E={np.max(abs(un-up)):.4e} EA={np.max(abs(vn-vp)):.4e} nominal u err={np.max(abs(un-ue(t))):.2e} v err={np.max(abs(vn-ve(t))):.2e}")
